#pragma once

// Closed-form references used to check the Monte Carlo machinery.  Everything
// here is computed from textbook formulas only, independent of the library's
// solvers, so agreement is meaningful evidence.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Black-Scholes call on a lognormal asset with constant rate and volatility.
inline double bs_call(double spot, double strike, double rate, double sigma, double maturity) {
    double sd = sigma * std::sqrt(maturity);
    double d1 = (std::log(spot / strike) + (rate + 0.5 * sigma * sigma) * maturity) / sd;
    double d2 = d1 - sd;
    return spot * normal_cdf(d1) - strike * std::exp(-rate * maturity) * normal_cdf(d2);
}

inline double bs_put(double spot, double strike, double rate, double sigma, double maturity) {
    return bs_call(spot, strike, rate, sigma, maturity) -
           spot + strike * std::exp(-rate * maturity);
}

// Delta of the Black-Scholes call.
inline double bs_call_delta(double spot, double strike, double rate, double sigma,
                            double maturity) {
    double sd = sigma * std::sqrt(maturity);
    double d1 = (std::log(spot / strike) + (rate + 0.5 * sigma * sigma) * maturity) / sd;
    return normal_cdf(d1);
}

struct Stats {
    double mean = 0.0;
    double std_error = 0.0;
};

inline Stats mean_and_error(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

}  // namespace oracle
