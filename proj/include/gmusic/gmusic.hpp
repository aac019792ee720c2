#pragma once

#include "gmusic/error.hpp"
#include "gmusic/geometry.hpp"
#include "gmusic/kernel.hpp"
#include "gmusic/signal.hpp"
#include "gmusic/fft.hpp"
#include "gmusic/hankel.hpp"
#include "gmusic/landscape.hpp"
#include "gmusic/optimizer.hpp"
#include "gmusic/minimax.hpp"
#include "gmusic/io.hpp"
#include "gmusic/harness.hpp"
