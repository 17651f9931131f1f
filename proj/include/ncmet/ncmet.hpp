#pragma once

#include "ncmet/algebra.hpp"
#include "ncmet/batteries.hpp"
#include "ncmet/cone.hpp"
#include "ncmet/dynamics.hpp"
#include "ncmet/errors.hpp"
#include "ncmet/experiment.hpp"
#include "ncmet/met.hpp"
#include "ncmet/product.hpp"
#include "ncmet/qr_oracle.hpp"
#include "ncmet/rng.hpp"
#include "ncmet/serialize.hpp"
#include "ncmet/spectral.hpp"
