#ifndef MOTIL_LABELS_HPP
#define MOTIL_LABELS_HPP

#include <array>

namespace motil {

// The three target percentages. Components lie in [0, 100]; dataset labels
// sum to 100 within rounding tolerance.
struct MotilityLabel {
    double progressive = 0.0;
    double non_progressive = 0.0;
    double immotile = 0.0;

    std::array<double, 3> as_array() const {
        return {progressive, non_progressive, immotile};
    }
    static MotilityLabel from_array(const std::array<double, 3>& a) {
        return {a[0], a[1], a[2]};
    }
};

} // namespace motil

#endif
