#pragma once

#include "cvgme/errors.hpp"
#include "cvgme/fock.hpp"
#include "cvgme/gaussian_ops.hpp"
#include "cvgme/phase_space.hpp"
#include "cvgme/numerics.hpp"
#include "cvgme/families.hpp"
#include "cvgme/witnesses.hpp"
#include "cvgme/report.hpp"
