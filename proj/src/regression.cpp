#include "erpia/regression.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace erpia {
namespace {

constexpr double kSpreadCutoff = 1e-12;
constexpr double kRankCutoff = 1e-10;

void standardize(const StepFactor& f, double* phi, std::size_t p) noexcept {
    phi[0] = 1.0;
    for (std::size_t j = 1; j < p; ++j) phi[j] = (phi[j] - f.mean[j]) * f.inv_scale[j];
}

// Shared by the factorization and evaluate() so both round identically.
void project(const StepFactor& f, const double* phi, std::size_t p, double* q) noexcept {
    for (std::size_t j = 0; j < f.rank; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < p; ++l)
            acc += f.transform(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) * phi[l];
        q[j] = acc;
    }
}

// Fills the orthonormal features of date k into `store` ([feature][path],
// double precision).
StepFactor factorize(const PathBatch& batch, const Basis& basis, std::size_t k, double* store) {
    const std::size_t m = batch.paths();
    const std::size_t p = basis.dimension();
    const auto payoff = batch.payoffs_at(k);
    std::array<double, kMaxBasis> phi;

    StepFactor f;
    f.mean.assign(p, 0.0);
    f.inv_scale.assign(p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        basis.evaluate(batch.prices(k, i), payoff[i], phi.data());
        for (std::size_t j = 0; j < p; ++j) f.mean[j] += phi[j];
    }
    for (auto& v : f.mean) v /= static_cast<double>(m);

    std::vector<double> ss(p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        basis.evaluate(batch.prices(k, i), payoff[i], phi.data());
        for (std::size_t j = 0; j < p; ++j) ss[j] += (phi[j] - f.mean[j]) * (phi[j] - f.mean[j]);
    }
    f.inv_scale[0] = 1.0;
    f.mean[0] = 0.0;
    for (std::size_t j = 1; j < p; ++j) {
        const double sd = std::sqrt(ss[j] / static_cast<double>(m));
        if (sd > kSpreadCutoff * std::max(1.0, std::abs(f.mean[j]))) f.inv_scale[j] = 1.0 / sd;
    }

    Eigen::MatrixXd design(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < m; ++i) {
        basis.evaluate(batch.prices(k, i), payoff[i], phi.data());
        standardize(f, phi.data(), p);
        for (std::size_t j = 0; j < p; ++j)
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = phi[j];
    }

    // Column-pivoted QR picks the independent columns; T = P R^{-1} sqrt(M) maps
    // them to features that are orthonormal over the sample.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.rows(), design.cols());
    qr.setThreshold(kRankCutoff);
    qr.compute(design);
    const auto rank = qr.rank();
    f.rank = static_cast<std::size_t>(rank);
    const Eigen::MatrixXd r11 = qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv =
        r11.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank, rank));
    f.transform = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), rank);
    const auto& perm = qr.colsPermutation().indices();
    const double root_m = std::sqrt(static_cast<double>(m));
    for (Eigen::Index i = 0; i < rank; ++i) f.transform.row(perm(i)) = rinv.row(i) * root_m;

    std::array<double, kMaxBasis> q;
    Eigen::MatrixXd stored(static_cast<Eigen::Index>(m), rank);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j) phi[j] = design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        project(f, phi.data(), p, q.data());
        for (std::size_t j = 0; j < f.rank; ++j) {
            store[j * m + i] = q[j];
            stored(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = q[j];
        }
    }
    const Eigen::MatrixXd gram = stored.transpose() * stored / static_cast<double>(m);
    f.gram.compute(gram);
    return f;
}

void check_target(std::span<const double> target, std::size_t m) {
    if (target.size() != m)
        throw std::invalid_argument("cond_exp: target has " + std::to_string(target.size()) +
                                    " entries, expected " + std::to_string(m));
    for (std::size_t i = 0; i < target.size(); ++i)
        if (!std::isfinite(target[i]))
            throw std::invalid_argument("cond_exp: non-finite target at path " + std::to_string(i));
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

} // namespace

RegressionPlan::RegressionPlan(const PathBatch& batch, Basis basis, Exec exec)
    : batch_(&batch), basis_(std::move(basis)) {
    if (basis_.asset_dim() != batch.dim())
        throw ConfigError("regression: basis dimension does not match the batch");
    if (batch.paths() < basis_.dimension())
        throw ConfigError("regression: need at least as many paths as basis functions");
    const std::size_t n = batch.steps();
    const std::size_t m = batch.paths();
    const std::size_t p = basis_.dimension();
    factors_.resize(n);
    features_.resize(n * p * m);
    auto build = [&](std::size_t k) {
        factors_[k] = factorize(batch, basis_, k, features_.data() + k * p * m);
    };
    if (exec == Exec::Parallel) {
        const auto steps = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < steps; ++k) build(static_cast<std::size_t>(k));
    } else {
        for (std::size_t k = 0; k < n; ++k) build(k);
    }
}

void RegressionPlan::orthonormal(std::size_t k, std::span<const double> prices, double payoff,
                                 double* out) const noexcept {
    const auto& f = factors_[k];
    std::array<double, kMaxBasis> phi;
    basis_.evaluate(prices, payoff, phi.data());
    standardize(f, phi.data(), basis_.dimension());
    project(f, phi.data(), basis_.dimension(), out);
}

std::vector<double> RegressionPlan::coefficients(std::size_t k, std::span<const double> target,
                                                 Exec exec) const {
    const std::size_t m = paths();
    const std::size_t p = factors_.at(k).rank;
    check_target(target, m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));

    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < p; ++j)
                g(static_cast<Eigen::Index>(j)) += feature(k, j)[i] * target[i];
    } else {
        const std::size_t blocks = (m + kReduceBlock - 1) / kReduceBlock;
        std::vector<double> partial(blocks * p);
        const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t b = 0; b < nb; ++b) {
            const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
            const std::size_t len = std::min(m, lo + kReduceBlock) - lo;
            for (std::size_t j = 0; j < p; ++j)
                partial[static_cast<std::size_t>(b) * p + j] =
                    dot(feature(k, j) + lo, target.data() + lo, len);
        }
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t j = 0; j < p; ++j) g(static_cast<Eigen::Index>(j)) += partial[b * p + j];
    }
    const Eigen::VectorXd beta = factors_[k].gram.solve(g / static_cast<double>(m));
    return {beta.data(), beta.data() + beta.size()};
}

void RegressionPlan::fit(std::size_t k, std::span<const double> coeffs, std::span<double> out,
                         Exec exec) const {
    const std::size_t m = paths();
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < m; ++i) out[i] = fitted(k, coeffs, i);
        return;
    }
    const std::size_t p = factors_.at(k).rank;
    const std::size_t blocks = (m + kReduceBlock - 1) / kReduceBlock;
    const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const std::size_t len = std::min(m, lo + kReduceBlock) - lo;
        double* o = out.data() + lo;
        std::fill(o, o + len, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
            const double* x = feature(k, j) + lo;
            const double c = coeffs[j];
#pragma omp simd
            for (std::size_t i = 0; i < len; ++i) o[i] += c * x[i];
        }
    }
}

double RegressionPlan::evaluate(std::size_t k, std::span<const double> coeffs,
                                std::span<const double> prices, double payoff) const noexcept {
    std::array<double, kMaxBasis> q;
    orthonormal(k, prices, payoff, q.data());
    double v = 0.0;
    for (std::size_t j = 0; j < factors_[k].rank; ++j) v += coeffs[j] * q[j];
    return v;
}

void RegressionPlan::cond_exp(std::size_t k, std::span<const double> target, std::span<double> out,
                              Exec exec) const {
    if (k >= steps()) throw std::out_of_range("cond_exp: date index out of range");
    const auto beta = coefficients(k, target, exec);
    if (out.size() != paths()) throw std::invalid_argument("cond_exp: output size mismatch");
    fit(k, beta, out, exec);
}

std::vector<double> RegressionPlan::cond_exp(std::size_t k, std::span<const double> target,
                                             Exec exec) const {
    std::vector<double> out(paths());
    cond_exp(k, target, out, exec);
    return out;
}

RegressionPlan build_plan(const PathBatch& batch, const Basis& basis, Exec exec) {
    return RegressionPlan(batch, basis, exec);
}

} // namespace erpia
