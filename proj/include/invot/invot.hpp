#pragma once

#include "invot/costs.hpp"
#include "invot/errors.hpp"
#include "invot/fft.hpp"
#include "invot/forward.hpp"
#include "invot/grid.hpp"
#include "invot/identify.hpp"
#include "invot/io.hpp"
#include "invot/lp.hpp"
#include "invot/measures.hpp"
#include "invot/quadrature.hpp"
#include "invot/recovery.hpp"
#include "invot/special.hpp"
#include "invot/transforms.hpp"
