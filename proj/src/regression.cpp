#include "bsdelab/regression.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bsdelab/errors.hpp"

namespace bsdelab {
namespace {

// Multi-indices of total degree <= degree over n_vars variables, intercept
// first, then ascending degree.
std::vector<std::vector<unsigned>> monomial_exponents(std::size_t degree, std::size_t n_vars) {
    std::vector<std::vector<unsigned>> result;
    std::vector<unsigned> current(n_vars, 0);
    // Group by total degree so the intercept is first.
    for (unsigned total = 0; total <= degree; ++total) {
        std::vector<std::vector<unsigned>> of_degree;
        std::function<void(std::size_t, unsigned)> fill = [&](std::size_t var, unsigned left) {
            if (var + 1 == n_vars) {
                current[var] = left;
                of_degree.push_back(current);
                return;
            }
            for (unsigned e = 0; e <= left; ++e) {
                current[var] = e;
                fill(var + 1, left - e);
            }
        };
        fill(0, total);
        result.insert(result.end(), of_degree.begin(), of_degree.end());
    }
    return result;
}

}  // namespace

RegressionBasis RegressionBasis::log_price_monomials(std::size_t degree,
                                                     const Eigen::VectorXd& reference_spot,
                                                     double ridge) {
    const auto d = static_cast<std::size_t>(reference_spot.size());
    if (d == 0) throw std::invalid_argument("regression basis: need at least one risky asset");
    for (Eigen::Index i = 0; i < reference_spot.size(); ++i) {
        if (!(reference_spot[i] > 0.0)) {
            throw std::invalid_argument("regression basis: reference spot must be positive");
        }
    }
    Eigen::VectorXd log_ref = reference_spot.array().log();
    auto exponents = monomial_exponents(degree, d);

    RegressionBasis basis;
    basis.count = exponents.size();
    basis.ridge = ridge;
    basis.features = [exponents, log_ref, d](double, std::span<const double> prices,
                                             std::span<double> out) {
        // prices holds the bond first; risky assets start at index 1.
        std::vector<double> x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = std::log(prices[1 + i]) - log_ref[i];
        for (std::size_t m = 0; m < exponents.size(); ++m) {
            double value = 1.0;
            for (std::size_t i = 0; i < d; ++i) {
                for (unsigned e = 0; e < exponents[m][i]; ++e) value *= x[i];
            }
            out[m] = value;
        }
    };
    return basis;
}

double RegressionBasis::resolve_ridge(std::size_t n_paths) const {
    if (ridge >= 0.0) return ridge;
    return 1e-8 * static_cast<double>(n_paths);
}

RegressionFit condexp_regress(const Eigen::Ref<const Eigen::MatrixXd>& targets,
                              const Eigen::Ref<const Eigen::MatrixXd>& design, double ridge) {
    if (targets.rows() != design.rows()) {
        throw std::invalid_argument("condexp_regress: row count mismatch");
    }
    if (design.cols() == 0 || design.rows() == 0) {
        throw std::invalid_argument("condexp_regress: empty design matrix");
    }
    if (ridge < 0.0) {
        throw std::invalid_argument("condexp_regress: ridge must be non-negative");
    }

    const Eigen::Index p = design.cols();
    Eigen::MatrixXd gram = design.transpose() * design;
    for (Eigen::Index j = 1; j < p; ++j) gram(j, j) += ridge;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(gram);
    double max_eig = eigs.eigenvalues().maxCoeff();
    double min_eig = eigs.eigenvalues().minCoeff();
    double condition = (min_eig > 0.0) ? max_eig / min_eig
                                       : std::numeric_limits<double>::infinity();
    if (!(min_eig > max_eig * 1e-14)) {
        throw ConditioningError(condition, "condexp_regress: design matrix rank deficient");
    }

    RegressionFit fit;
    fit.condition = condition;
    fit.coefficients = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(design.transpose() * targets);
    fit.fitted = design * fit.coefficients;
    return fit;
}

}  // namespace bsdelab
