#pragma once

#include "fbfm/bits.hpp"
#include "fbfm/entropy.hpp"
#include "fbfm/fm_index.hpp"
#include "fbfm/rank_bitvector.hpp"
#include "fbfm/storage.hpp"
#include "fbfm/text.hpp"
#include "fbfm/wavelet_tree.hpp"
