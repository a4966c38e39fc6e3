#include "erpia/basis.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace erpia {

Basis::Basis(BasisKind kind, std::size_t asset_dim, double scale)
    : kind_(kind), asset_dim_(asset_dim), inv_scale_(1.0 / scale) {
    if (!(scale > 0.0)) throw ConfigError("basis: scale must be > 0");
    if (asset_dim < 1) throw ConfigError("basis: asset dimension must be >= 1");
}

Basis Basis::andersen_broadie13(double scale) {
    Basis b(BasisKind::AndersenBroadie13, 2, scale);
    b.dimension_ = 13;
    return b;
}

Basis Basis::polynomial(std::size_t degree, std::size_t dim, double scale, bool payoff_feature) {
    Basis b(BasisKind::Polynomial, dim, scale);
    if (dim * (degree + 1) > kMaxBasis) throw ConfigError("basis: degree too high");
    b.degree_ = degree;
    b.payoff_feature_ = payoff_feature;
    // Enumerate monomials by increasing total degree.
    std::vector<unsigned> e(dim, 0);
    for (std::size_t total = 0; total <= degree; ++total) {
        std::function<void(std::size_t, std::size_t)> fill = [&](std::size_t i, std::size_t left) {
            if (i + 1 == dim) {
                e[i] = static_cast<unsigned>(left);
                b.exponents_.insert(b.exponents_.end(), e.begin(), e.end());
                return;
            }
            for (std::size_t a = left + 1; a-- > 0;) {
                e[i] = static_cast<unsigned>(a);
                fill(i + 1, left - a);
            }
        };
        fill(0, total);
    }
    b.dimension_ = b.exponents_.size() / dim + (payoff_feature ? 1 : 0);
    if (b.dimension_ > kMaxBasis) throw ConfigError("basis: too many features");
    return b;
}

Basis Basis::from_spec(const BasisSpec& spec, std::size_t dim, double scale) {
    if (spec.kind == BasisKind::AndersenBroadie13) {
        if (dim != 2) throw ConfigError("basis: the 13-function max-call basis requires d = 2");
        return andersen_broadie13(scale);
    }
    return polynomial(spec.degree, dim, scale, spec.payoff_feature);
}

std::string Basis::describe() const {
    if (kind_ == BasisKind::AndersenBroadie13) return "ab13";
    return "poly" + std::to_string(degree_) + (payoff_feature_ ? "+payoff" : "");
}

void Basis::evaluate(std::span<const double> prices, double payoff, double* out) const noexcept {
    const double p = payoff * inv_scale_;
    if (kind_ == BasisKind::AndersenBroadie13) {
        const double x1 = prices[0] * inv_scale_;
        const double x2 = prices[1] * inv_scale_;
        const double hi = std::max(x1, x2);
        const double lo = std::min(x1, x2);
        out[0] = 1.0;
        out[1] = x1;
        out[2] = x2;
        out[3] = x1 * x1;
        out[4] = x2 * x2;
        out[5] = x1 * x2;
        out[6] = hi;
        out[7] = hi * hi;
        out[8] = hi * hi * hi;
        out[9] = p;
        out[10] = p * p;
        out[11] = p * p * p;
        out[12] = lo;
        return;
    }
    const std::size_t d = asset_dim_;
    // powers[i * (degree_ + 1) + a] = x_i^a
    std::array<double, kMaxBasis> powers;
    for (std::size_t i = 0; i < d; ++i) {
        const double x = prices[i] * inv_scale_;
        double v = 1.0;
        for (std::size_t a = 0; a <= degree_; ++a) {
            powers[i * (degree_ + 1) + a] = v;
            v *= x;
        }
    }
    const std::size_t monomials = exponents_.size() / d;
    for (std::size_t j = 0; j < monomials; ++j) {
        double v = 1.0;
        for (std::size_t i = 0; i < d; ++i) v *= powers[i * (degree_ + 1) + exponents_[j * d + i]];
        out[j] = v;
    }
    if (payoff_feature_) out[monomials] = p;
}

} // namespace erpia

namespace erpia {

double basis_scale(const MarketModel& model, const Payoff& payoff) noexcept {
    if (payoff.kind != PayoffKind::Zero && payoff.strike > 0.0) return payoff.strike;
    double s = 0.0;
    for (double x : model.s0) s += x;
    return model.s0.empty() ? 1.0 : s / static_cast<double>(model.s0.size());
}

} // namespace erpia
