#include "bsdelab/stochastic.hpp"

#include <cmath>
#include <stdexcept>

#include "bsdelab/parallel.hpp"

namespace bsdelab {
namespace {

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
    if (!(a == b)) {
        throw std::invalid_argument(std::string(what) + ": time grid mismatch");
    }
}

}  // namespace

DiscreteProcess ito_integrate(const DiscreteProcess& integrand, const PathBundle& bundle) {
    require_same_grid(integrand.grid(), bundle.grid(), "ito_integrate");
    if (integrand.dim() != bundle.dim()) {
        throw std::invalid_argument("ito_integrate: integrand dimension must match the bundle");
    }
    if (integrand.n_paths() != bundle.n_paths()) {
        throw std::invalid_argument("ito_integrate: path count mismatch");
    }

    const std::size_t steps = bundle.grid().steps();
    const std::size_t dim = bundle.dim();
    DiscreteProcess integral(bundle.grid(), 1, bundle.n_paths());
    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double acc = 0.0;
            integral.at(p, 0) = 0.0;
            for (std::size_t k = 0; k < steps; ++k) {
                auto f = integrand.node_values(p, k);
                auto dw = bundle.increment(p, k);
                for (std::size_t j = 0; j < dim; ++j) acc += f[j] * dw[j];
                integral.at(p, k + 1) = acc;
            }
        }
    });
    return integral;
}

DiscreteProcess stochastic_exponential(const DiscreteProcess& drift, const DiscreteProcess& vol,
                                       const PathBundle& bundle) {
    require_same_grid(drift.grid(), bundle.grid(), "stochastic_exponential");
    require_same_grid(vol.grid(), bundle.grid(), "stochastic_exponential");
    if (drift.dim() != 1) {
        throw std::invalid_argument("stochastic_exponential: drift must be scalar");
    }
    if (vol.dim() != bundle.dim()) {
        throw std::invalid_argument("stochastic_exponential: vol dimension must match the bundle");
    }
    if (drift.n_paths() != bundle.n_paths() || vol.n_paths() != bundle.n_paths()) {
        throw std::invalid_argument("stochastic_exponential: path count mismatch");
    }

    const std::size_t steps = bundle.grid().steps();
    const std::size_t dim = bundle.dim();
    DiscreteProcess result(bundle.grid(), 1, bundle.n_paths());
    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            // Accumulate the log to keep the value strictly positive.
            double log_acc = 0.0;
            result.at(p, 0) = 1.0;
            for (std::size_t k = 0; k < steps; ++k) {
                auto v = vol.node_values(p, k);
                auto dw = bundle.increment(p, k);
                double vol_sq = 0.0;
                double vol_dw = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    vol_sq += v[j] * v[j];
                    vol_dw += v[j] * dw[j];
                }
                log_acc += (drift.at(p, k) - 0.5 * vol_sq) * bundle.grid().dt(k) + vol_dw;
                result.at(p, k + 1) = std::exp(log_acc);
            }
        }
    });
    return result;
}

}  // namespace bsdelab
