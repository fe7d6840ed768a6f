#pragma once

#include "distillfuzz/arch_state.hpp"
#include "distillfuzz/asm_text.hpp"
#include "distillfuzz/binary32.hpp"
#include "distillfuzz/bugs.hpp"
#include "distillfuzz/campaign.hpp"
#include "distillfuzz/codec.hpp"
#include "distillfuzz/config.hpp"
#include "distillfuzz/coverage.hpp"
#include "distillfuzz/crosscheck.hpp"
#include "distillfuzz/events.hpp"
#include "distillfuzz/generate.hpp"
#include "distillfuzz/hash.hpp"
#include "distillfuzz/isa.hpp"
#include "distillfuzz/machine.hpp"
#include "distillfuzz/matrix.hpp"
#include "distillfuzz/mutation.hpp"
#include "distillfuzz/relations.hpp"
#include "distillfuzz/report.hpp"
#include "distillfuzz/rng.hpp"
#include "distillfuzz/seeds.hpp"
#include "distillfuzz/sequence.hpp"
#include "distillfuzz/vaco.hpp"
#include "distillfuzz/witnesses.hpp"
