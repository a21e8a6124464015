#pragma once

#include "bsdelab/discrete_process.hpp"
#include "bsdelab/path_bundle.hpp"

namespace bsdelab {

// Left-endpoint stochastic integral I_t = int_0^t integrand . dW.  The
// integrand must share the bundle's grid and Brownian dimension.  I_0 = 0;
// node k+1 adds integrand(p, k) . dW(p, k).
DiscreteProcess ito_integrate(const DiscreteProcess& integrand, const PathBundle& bundle);

// Stochastic exponential of int drift dt + int vol . dW along each path:
//   X(p, k) = exp( sum_{j<k} (drift_j - |vol_j|^2 / 2) dt_j + sum_{j<k} vol_j . dW_j ).
// X_0 = 1 and X > 0 on every path.  drift is scalar, vol has the bundle's
// Brownian dimension; both are read at left endpoints.
DiscreteProcess stochastic_exponential(const DiscreteProcess& drift, const DiscreteProcess& vol,
                                       const PathBundle& bundle);

}  // namespace bsdelab
