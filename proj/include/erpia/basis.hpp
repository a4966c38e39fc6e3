#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "erpia/model.hpp"

namespace erpia {

inline constexpr std::size_t kMaxBasis = 64;

/// Regression features of the state at one date. Feature 0 is always the
/// constant function. Prices and payoff are divided by `scale` before
/// evaluation so that high powers stay O(1).
class Basis {
public:
    /// Thirteen features for two assets: 1, S1, S2, S1^2, S2^2, S1 S2,
    /// max, max^2, max^3, P, P^2, P^3, min.
    static Basis andersen_broadie13(double scale);
    /// All monomials of total degree <= `degree` in `dim` prices, optionally
    /// followed by the payoff value.
    static Basis polynomial(std::size_t degree, std::size_t dim, double scale,
                            bool payoff_feature = false);
    static Basis from_spec(const BasisSpec& spec, std::size_t dim, double scale);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t asset_dim() const noexcept { return asset_dim_; }
    [[nodiscard]] BasisKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string describe() const;

    /// Writes `dimension()` feature values to `out`.
    void evaluate(std::span<const double> prices, double payoff, double* out) const noexcept;

private:
    Basis(BasisKind kind, std::size_t asset_dim, double scale);

    BasisKind kind_;
    std::size_t asset_dim_;
    double inv_scale_;
    std::size_t degree_ = 0;
    bool payoff_feature_ = false;
    std::size_t dimension_ = 0;
    // Polynomial: exponents per monomial, asset_dim_ entries each.
    std::vector<unsigned> exponents_;
};

} // namespace erpia

namespace erpia {

/// Price normalization used for regression features: the strike when the
/// payoff has one, otherwise the mean initial price.
[[nodiscard]] double basis_scale(const MarketModel& model, const Payoff& payoff) noexcept;

} // namespace erpia
