#include "motil/rng.hpp"

#include <cmath>
#include <numeric>

namespace motil {

std::uint64_t Rng::below(std::uint64_t bound) {
    // Rejection sampling over the largest multiple of bound.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    // Partial Fisher-Yates: only the first k swaps are needed.
    for (int i = 0; i < k && i < n; ++i) {
        int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        out.push_back(idx[static_cast<std::size_t>(i)]);
    }
    return out;
}

} // namespace motil
