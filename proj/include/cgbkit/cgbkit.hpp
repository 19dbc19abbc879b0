#pragma once

#include "cgbkit/constants.hpp"
#include "cgbkit/dual.hpp"
#include "cgbkit/errors.hpp"
#include "cgbkit/forms.hpp"
#include "cgbkit/gaussbonnet.hpp"
#include "cgbkit/hypersurface.hpp"
#include "cgbkit/manifold.hpp"
#include "cgbkit/models.hpp"
#include "cgbkit/quadrature.hpp"
#include "cgbkit/spherical.hpp"
#include "cgbkit/tensor.hpp"
