#ifndef MOTIL_SVR_HPP
#define MOTIL_SVR_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "motil/labels.hpp"
#include "motil/matrix.hpp"

namespace motil {

enum class ScalerKind { none, standard, minmax };

std::string to_string(ScalerKind kind);
ScalerKind scaler_from_string(const std::string& name);

// Per-dimension affine transform x' = (x - offset) / scale.
struct Scaler {
    ScalerKind kind = ScalerKind::none;
    std::vector<double> offset;
    std::vector<double> scale;

    static Scaler fit(ScalerKind kind, const Matrix& x);
    Matrix transform(const Matrix& x) const;
    std::vector<double> transform_row(std::span<const double> row) const;
};

// Three independent linear epsilon-insensitive regressors sharing one
// scaler, solved in the dual by coordinate descent. The bias is carried as
// an augmented, regularized feature.
struct SvrModel {
    Scaler scaler;
    double c = 1.0;
    double epsilon = 0.1;
    std::array<std::vector<double>, 3> weights;
    std::array<double, 3> bias{};

    // Raw (unclipped) predictions for a feature row in original space.
    std::array<double, 3> predict_raw(std::span<const double> row) const;
};

// The paper's complexity grid: five values log-spaced over 10^-1..10^3.
std::vector<double> default_c_grid();

SvrModel train_svr(const Matrix& x, const std::vector<MotilityLabel>& y,
                   ScalerKind scaler, double c, double epsilon = 0.1,
                   double gap_tolerance = 1e-4, int max_passes = 10000);

struct SvrSelection {
    ScalerKind scaler = ScalerKind::none;
    double c = 1.0;
    double val_mae = 0.0;
    double val_rmse = 0.0;
};

// Grid selection by mean MAE over an internal 5-fold split of the training
// data. Ties go to the smaller complexity, then to the earlier scaler in
// the given order. A single-point grid is returned unchanged.
SvrSelection select_svr(const Matrix& x, const std::vector<MotilityLabel>& y,
                        const std::vector<ScalerKind>& scalers,
                        const std::vector<double>& c_grid, double epsilon = 0.1,
                        std::uint64_t seed = 0);

} // namespace motil

#endif
