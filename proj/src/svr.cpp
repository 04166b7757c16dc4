#include "motil/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "motil/errors.hpp"
#include "motil/rng.hpp"

namespace motil {

std::string to_string(ScalerKind kind) {
    switch (kind) {
        case ScalerKind::none: return "none";
        case ScalerKind::standard: return "standard";
        case ScalerKind::minmax: return "minmax";
    }
    return "none";
}

ScalerKind scaler_from_string(const std::string& name) {
    if (name == "none") return ScalerKind::none;
    if (name == "standard") return ScalerKind::standard;
    if (name == "minmax") return ScalerKind::minmax;
    throw ParamError("unknown scaler '" + name + "'");
}

Scaler Scaler::fit(ScalerKind kind, const Matrix& x) {
    Scaler s;
    s.kind = kind;
    s.offset.assign(static_cast<std::size_t>(x.cols), 0.0);
    s.scale.assign(static_cast<std::size_t>(x.cols), 1.0);
    if (kind == ScalerKind::none || x.rows == 0) return s;

    if (kind == ScalerKind::standard) {
        for (int c = 0; c < x.cols; ++c) {
            double mean = 0.0;
            for (int r = 0; r < x.rows; ++r) mean += x(r, c);
            mean /= x.rows;
            double var = 0.0;
            for (int r = 0; r < x.rows; ++r) {
                const double d = x(r, c) - mean;
                var += d * d;
            }
            const double sd = std::sqrt(var / x.rows);
            s.offset[static_cast<std::size_t>(c)] = mean;
            s.scale[static_cast<std::size_t>(c)] = sd > 0.0 ? sd : 1.0;
        }
    } else { // minmax
        for (int c = 0; c < x.cols; ++c) {
            double lo = x(0, c), hi = x(0, c);
            for (int r = 1; r < x.rows; ++r) {
                lo = std::min(lo, x(r, c));
                hi = std::max(hi, x(r, c));
            }
            s.offset[static_cast<std::size_t>(c)] = lo;
            s.scale[static_cast<std::size_t>(c)] = hi - lo > 0.0 ? hi - lo : 1.0;
        }
    }
    return s;
}

Matrix Scaler::transform(const Matrix& x) const {
    Matrix out = x;
    if (kind == ScalerKind::none) return out;
    for (int r = 0; r < x.rows; ++r) {
        for (int c = 0; c < x.cols; ++c) {
            out(r, c) = (x(r, c) - offset[static_cast<std::size_t>(c)]) /
                        scale[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

std::vector<double> Scaler::transform_row(std::span<const double> row) const {
    std::vector<double> out(row.begin(), row.end());
    if (kind == ScalerKind::none) return out;
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = (out[c] - offset[c]) / scale[c];
    }
    return out;
}

std::array<double, 3> SvrModel::predict_raw(std::span<const double> row) const {
    const std::vector<double> scaled = scaler.transform_row(row);
    std::array<double, 3> out{};
    for (int t = 0; t < 3; ++t) {
        double acc = bias[static_cast<std::size_t>(t)];
        const auto& w = weights[static_cast<std::size_t>(t)];
        for (std::size_t c = 0; c < scaled.size(); ++c) acc += w[c] * scaled[c];
        out[static_cast<std::size_t>(t)] = acc;
    }
    return out;
}

std::vector<double> default_c_grid() { return {0.1, 1.0, 10.0, 100.0, 1000.0}; }

namespace {

// The bias is carried as an augmented feature of this magnitude, which
// shrinks its share of the regularizer to bias^2 / kBiasScale^2 and keeps
// constant targets out of the weight vector.
constexpr double kBiasScale = 1000.0;

// Dual coordinate descent for one L1-loss linear epsilon-SVR target.
// Minimises 0.5 w'w + C sum max(0, |w'x_i - y_i| - eps). Stops when the
// relative duality gap drops below gap_tolerance.
void solve_target(const Matrix& xs, const std::vector<double>& y, double c,
                  double epsilon, double gap_tolerance, int max_passes,
                  std::vector<double>& w_out, double& bias_out) {
    const int n = xs.rows;
    const int d = xs.cols + 1; // augmented bias feature

    std::vector<double> q(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double acc = kBiasScale * kBiasScale;
        for (int j = 0; j < xs.cols; ++j) acc += xs(i, j) * xs(i, j);
        q[static_cast<std::size_t>(i)] = acc;
    }

    std::vector<double> w(static_cast<std::size_t>(d), 0.0);
    std::vector<double> beta(static_cast<std::size_t>(n), 0.0);

    auto dot_row = [&](int i) {
        double acc = w[static_cast<std::size_t>(d - 1)] * kBiasScale;
        for (int j = 0; j < xs.cols; ++j) acc += w[static_cast<std::size_t>(j)] * xs(i, j);
        return acc;
    };

    for (int pass = 0; pass < max_passes; ++pass) {
        for (int i = 0; i < n; ++i) {
            const double g = dot_row(i) - y[static_cast<std::size_t>(i)];
            const double qi = q[static_cast<std::size_t>(i)];
            const double center = beta[static_cast<std::size_t>(i)] - g / qi;
            const double shrink = epsilon / qi;
            double next = 0.0;
            if (center > shrink) next = center - shrink;
            else if (center < -shrink) next = center + shrink;
            next = std::clamp(next, -c, c);
            const double delta = next - beta[static_cast<std::size_t>(i)];
            if (delta == 0.0) continue;
            beta[static_cast<std::size_t>(i)] = next;
            for (int j = 0; j < xs.cols; ++j)
                w[static_cast<std::size_t>(j)] += delta * xs(i, j);
            w[static_cast<std::size_t>(d - 1)] += delta * kBiasScale;
        }

        double w_norm_sq = 0.0;
        for (double v : w) w_norm_sq += v * v;
        double primal = 0.5 * w_norm_sq;
        double dual = -0.5 * w_norm_sq;
        for (int i = 0; i < n; ++i) {
            const double resid = dot_row(i) - y[static_cast<std::size_t>(i)];
            primal += c * std::max(0.0, std::abs(resid) - epsilon);
            dual += y[static_cast<std::size_t>(i)] * beta[static_cast<std::size_t>(i)] -
                    epsilon * std::abs(beta[static_cast<std::size_t>(i)]);
        }
        if (primal - dual <= gap_tolerance * std::max(1.0, std::abs(primal))) break;
    }

    w_out.assign(w.begin(), w.end() - 1);
    bias_out = w[static_cast<std::size_t>(d - 1)] * kBiasScale;
}

} // namespace

SvrModel train_svr(const Matrix& x, const std::vector<MotilityLabel>& y,
                   ScalerKind scaler, double c, double epsilon,
                   double gap_tolerance, int max_passes) {
    if (c <= 0.0) throw ParamError("C must be positive");
    if (x.rows != static_cast<int>(y.size()))
        throw TrainError("feature rows and labels are misaligned");
    if (x.rows == 0) throw TrainError("no training rows");
    for (double v : x.data) {
        if (!std::isfinite(v)) throw TrainError("non-finite feature value");
    }
    for (const auto& label : y) {
        for (double v : label.as_array()) {
            if (!std::isfinite(v)) throw TrainError("non-finite label value");
        }
    }

    SvrModel model;
    model.scaler = Scaler::fit(scaler, x);
    model.c = c;
    model.epsilon = epsilon;
    const Matrix xs = model.scaler.transform(x);

    for (int t = 0; t < 3; ++t) {
        std::vector<double> target(static_cast<std::size_t>(x.rows));
        for (int i = 0; i < x.rows; ++i)
            target[static_cast<std::size_t>(i)] =
                y[static_cast<std::size_t>(i)].as_array()[static_cast<std::size_t>(t)];
        solve_target(xs, target, c, epsilon, gap_tolerance, max_passes,
                     model.weights[static_cast<std::size_t>(t)],
                     model.bias[static_cast<std::size_t>(t)]);
    }
    return model;
}

SvrSelection select_svr(const Matrix& x, const std::vector<MotilityLabel>& y,
                        const std::vector<ScalerKind>& scalers,
                        const std::vector<double>& c_grid, double epsilon,
                        std::uint64_t seed) {
    if (scalers.empty() || c_grid.empty())
        throw ParamError("select_svr needs a non-empty grid");

    auto evaluate = [&](ScalerKind scaler, double c, double& mae, double& rmse) {
        const int folds = 5;
        std::vector<int> order(static_cast<std::size_t>(x.rows));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(seed);
        rng.shuffle(order);

        double abs_sum = 0.0, sq_sum = 0.0;
        std::size_t terms = 0;
        for (int k = 0; k < folds; ++k) {
            std::vector<int> train_idx, test_idx;
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (static_cast<int>(i) % folds == k) test_idx.push_back(order[i]);
                else train_idx.push_back(order[i]);
            }
            if (train_idx.empty() || test_idx.empty()) continue;

            Matrix xt(static_cast<int>(train_idx.size()), x.cols);
            std::vector<MotilityLabel> yt;
            for (std::size_t i = 0; i < train_idx.size(); ++i) {
                for (int cidx = 0; cidx < x.cols; ++cidx)
                    xt(static_cast<int>(i), cidx) = x(train_idx[i], cidx);
                yt.push_back(y[static_cast<std::size_t>(train_idx[i])]);
            }
            const SvrModel model = train_svr(xt, yt, scaler, c, epsilon);
            for (int idx : test_idx) {
                const auto raw = model.predict_raw(x.row(idx));
                const auto truth = y[static_cast<std::size_t>(idx)].as_array();
                for (int t = 0; t < 3; ++t) {
                    const double pred =
                        std::clamp(raw[static_cast<std::size_t>(t)], 0.0, 100.0);
                    const double err = pred - truth[static_cast<std::size_t>(t)];
                    abs_sum += std::abs(err);
                    sq_sum += err * err;
                    ++terms;
                }
            }
        }
        mae = abs_sum / static_cast<double>(terms);
        rmse = std::sqrt(sq_sum / static_cast<double>(terms));
    };

    SvrSelection best;
    if (scalers.size() == 1 && c_grid.size() == 1) {
        best.scaler = scalers.front();
        best.c = c_grid.front();
        if (x.rows >= 2) evaluate(best.scaler, best.c, best.val_mae, best.val_rmse);
        return best;
    }
    if (x.rows < 10) throw ParamError("select_svr needs at least 10 samples");

    double best_mae = std::numeric_limits<double>::infinity();
    for (double c : c_grid) {
        for (ScalerKind scaler : scalers) {
            double mae = 0.0, rmse = 0.0;
            evaluate(scaler, c, mae, rmse);
            if (mae < best_mae) {
                best_mae = mae;
                best = {scaler, c, mae, rmse};
            }
        }
    }
    return best;
}

} // namespace motil
