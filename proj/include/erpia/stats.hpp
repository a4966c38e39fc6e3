#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace erpia {

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased

    [[nodiscard]] double stderr_() const noexcept {
        return count > 1 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
    }
};

/// Two-pass sample mean and variance, summed in index order.
[[nodiscard]] inline Moments sample_moments(std::span<const double> x) noexcept {
    Moments m;
    m.count = x.size();
    if (x.empty()) return m;
    double sum = 0.0;
    for (double v : x) sum += v;
    m.mean = sum / static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - m.mean) * (v - m.mean);
        m.variance = ss / static_cast<double>(x.size() - 1);
    }
    return m;
}

} // namespace erpia
