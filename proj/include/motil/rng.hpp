#ifndef MOTIL_RNG_HPP
#define MOTIL_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace motil {

// Seeded generator with self-contained distributions. std::mt19937_64 output
// is pinned by the standard; the std:: distributions are not, so uniform,
// normal and shuffle are implemented here to keep streams identical across
// standard libraries. Every consumer takes an explicit seed; there is no
// global RNG state anywhere in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Unbiased integer in [0, bound) via rejection sampling. bound > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform double in [0, 1) with 53 bits of randomness.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Marsaglia polar method (no trig, spare cached).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn from [0, n); order is the draw order.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace motil

#endif
