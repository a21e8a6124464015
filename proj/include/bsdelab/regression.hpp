#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace bsdelab {

// Auto ridge resolves to 1e-8 * n_paths at solve time.
inline constexpr double kAutoRidge = -1.0;

// Cross-sectional feature map for conditional expectations given the node
// state.  Column 0 is an intercept and stays unpenalized so that constant
// targets are reproduced exactly.
struct RegressionBasis {
    std::function<void(double, std::span<const double>, std::span<double>)> features;
    std::size_t count = 0;
    double ridge = kAutoRidge;

    // Monomials of centered log prices up to the given total degree, one
    // variable per risky asset.  Centering at the reference spot keeps the
    // Gram matrix well conditioned; the spanned polynomial space is the same.
    static RegressionBasis log_price_monomials(std::size_t degree,
                                               const Eigen::VectorXd& reference_spot,
                                               double ridge = kAutoRidge);

    double resolve_ridge(std::size_t n_paths) const;
};

struct RegressionFit {
    Eigen::MatrixXd fitted;        // n_obs x n_targets
    Eigen::MatrixXd coefficients;  // n_features x n_targets
    double condition = 0.0;        // of the ridge-augmented Gram matrix
};

// Ridge least squares fitted values: projects each target column onto the
// span of the design columns.  The intercept column (index 0) is not
// penalized.  Throws ConditioningError when the Gram matrix is singular
// beyond what the ridge term rescues (only possible at ridge = 0).
RegressionFit condexp_regress(const Eigen::Ref<const Eigen::MatrixXd>& targets,
                              const Eigen::Ref<const Eigen::MatrixXd>& design, double ridge);

}  // namespace bsdelab
