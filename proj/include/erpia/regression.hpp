#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "erpia/basis.hpp"
#include "erpia/exec.hpp"
#include "erpia/paths.hpp"

namespace erpia {

/// Least-squares factorization of the design matrix at one date. Columns are
/// centred and scaled, then a column-pivoted QR picks a numerically independent
/// subset and maps it to features that are orthonormal over the sample. Those
/// features are what the plan stores, so projections never go through the
/// badly conditioned raw basis.
struct StepFactor {
    std::vector<double> mean;
    std::vector<double> inv_scale;  // 0 marks a column with no spread
    Eigen::MatrixXd transform;      // p x rank, orthonormal features = transform^t * standardized
    Eigen::LLT<Eigen::MatrixXd> gram;  // of the stored features, close to identity
    std::size_t rank = 0;
};

/// Conditional-expectation estimator E[. | F_{t_k}] for k = 0..N-1, built once
/// per batch and reused for every right-hand side. The orthonormal design is
/// cached (N * M * rank doubles). Holds a reference to the batch, which must
/// outlive the plan.
class RegressionPlan {
public:
    RegressionPlan(const PathBatch& batch, Basis basis, Exec exec = Exec::Parallel);

    [[nodiscard]] std::size_t steps() const noexcept { return factors_.size(); }
    [[nodiscard]] std::size_t paths() const noexcept { return batch_->paths(); }
    [[nodiscard]] const Basis& basis() const noexcept { return basis_; }
    [[nodiscard]] const PathBatch& batch() const noexcept { return *batch_; }
    [[nodiscard]] const StepFactor& factor(std::size_t k) const { return factors_.at(k); }

    /// Fitted values of the regression of `target` on the basis at date k.
    void cond_exp(std::size_t k, std::span<const double> target, std::span<double> out,
                  Exec exec = Exec::Parallel) const;
    [[nodiscard]] std::vector<double> cond_exp(std::size_t k, std::span<const double> target,
                                               Exec exec = Exec::Parallel) const;

    /// Coefficients on the orthonormal features of date k (factor(k).rank of them).
    [[nodiscard]] std::vector<double> coefficients(std::size_t k, std::span<const double> target,
                                                   Exec exec = Exec::Parallel) const;
    /// Fitted value at path i of the batch; same as evaluate() on that path's state.
    [[nodiscard]] double fitted(std::size_t k, std::span<const double> coeffs,
                                std::size_t i) const noexcept {
        double v = 0.0;
        for (std::size_t j = 0; j < factors_[k].rank; ++j)
            v += coeffs[j] * feature(k, j)[i];
        return v;
    }
    /// fitted() for every path of the batch.
    void fit(std::size_t k, std::span<const double> coeffs, std::span<double> out,
             Exec exec = Exec::Parallel) const;
    /// Evaluates a date-k regression function at an arbitrary state.
    [[nodiscard]] double evaluate(std::size_t k, std::span<const double> coeffs,
                                  std::span<const double> prices, double payoff) const noexcept;

private:
    [[nodiscard]] const double* feature(std::size_t k, std::size_t j) const noexcept {
        const std::size_t m = batch_->paths();
        return features_.data() + (k * basis_.dimension() + j) * m;
    }
    void orthonormal(std::size_t k, std::span<const double> prices, double payoff,
                     double* out) const noexcept;

    const PathBatch* batch_;
    Basis basis_;
    std::vector<StepFactor> factors_;
    // Orthonormal features of every path at every date, [k][feature][path].
    // Coefficients are solved against the Gram matrix of these stored values,
    // so fitted values are projections onto exactly their span.
    std::vector<double> features_;
};

[[nodiscard]] RegressionPlan build_plan(const PathBatch& batch, const Basis& basis,
                                        Exec exec = Exec::Parallel);

} // namespace erpia
