#include "motil/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "motil/errors.hpp"
#include "motil/rng.hpp"

namespace motil {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;

double activate(Activation act, double v) {
    if (act == Activation::relu) return v > 0.0 ? v : 0.0;
    return v > 0.0 ? v : std::expm1(v);
}

double activate_grad(Activation act, double v, double activated) {
    if (act == Activation::relu) return v > 0.0 ? 1.0 : 0.0;
    return v > 0.0 ? 1.0 : activated + 1.0;
}

// Per-layer forward intermediates for one batch.
struct LayerCache {
    Matrix z;      // pre-norm dense output
    Matrix x_hat;  // normalized
    Matrix y;      // gamma * x_hat + beta (pre-activation)
    Matrix a;      // activated (and dropped-out) output
    std::vector<double> mean;
    std::vector<double> var;
    std::vector<double> drop_mask; // per (row, unit) inverted-dropout factor
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Matrix out; // batch x 3
};

ForwardCache forward(const MlpModel& model, const Matrix& x, bool inference_bn,
                     const std::vector<std::vector<double>>* drop_masks,
                     std::vector<MlpLayer>* running_updates) {
    ForwardCache cache;
    const int batch = x.rows;
    Matrix input = x;

    for (std::size_t l = 0; l < model.hidden.size(); ++l) {
        const MlpLayer& layer = model.hidden[l];
        const int units = layer.w.rows;
        LayerCache lc;
        lc.z = Matrix(batch, units);
        for (int r = 0; r < batch; ++r) {
            for (int u = 0; u < units; ++u) {
                double acc = layer.b[static_cast<std::size_t>(u)];
                for (int c = 0; c < layer.w.cols; ++c) acc += layer.w(u, c) * input(r, c);
                lc.z(r, u) = acc;
            }
        }

        lc.mean.assign(static_cast<std::size_t>(units), 0.0);
        lc.var.assign(static_cast<std::size_t>(units), 0.0);
        if (inference_bn) {
            lc.mean = layer.run_mean;
            lc.var = layer.run_var;
        } else {
            for (int u = 0; u < units; ++u) {
                double m = 0.0;
                for (int r = 0; r < batch; ++r) m += lc.z(r, u);
                m /= batch;
                double v = 0.0;
                for (int r = 0; r < batch; ++r) {
                    const double d = lc.z(r, u) - m;
                    v += d * d;
                }
                lc.mean[static_cast<std::size_t>(u)] = m;
                lc.var[static_cast<std::size_t>(u)] = v / batch;
            }
            if (running_updates) {
                auto& ru = (*running_updates)[l];
                for (int u = 0; u < units; ++u) {
                    ru.run_mean[static_cast<std::size_t>(u)] =
                        kBnMomentum * ru.run_mean[static_cast<std::size_t>(u)] +
                        (1.0 - kBnMomentum) * lc.mean[static_cast<std::size_t>(u)];
                    ru.run_var[static_cast<std::size_t>(u)] =
                        kBnMomentum * ru.run_var[static_cast<std::size_t>(u)] +
                        (1.0 - kBnMomentum) * lc.var[static_cast<std::size_t>(u)];
                }
            }
        }

        lc.x_hat = Matrix(batch, units);
        lc.y = Matrix(batch, units);
        lc.a = Matrix(batch, units);
        lc.drop_mask.assign(static_cast<std::size_t>(batch) * units, 1.0);
        if (drop_masks) lc.drop_mask = (*drop_masks)[l];
        for (int u = 0; u < units; ++u) {
            const double inv_sd = 1.0 / std::sqrt(lc.var[static_cast<std::size_t>(u)] + kBnEps);
            for (int r = 0; r < batch; ++r) {
                const double xh = (lc.z(r, u) - lc.mean[static_cast<std::size_t>(u)]) * inv_sd;
                lc.x_hat(r, u) = xh;
                const double y = layer.gamma[static_cast<std::size_t>(u)] * xh +
                                 layer.beta[static_cast<std::size_t>(u)];
                lc.y(r, u) = y;
                lc.a(r, u) = activate(model.config.activation, y) *
                             lc.drop_mask[static_cast<std::size_t>(r) * units + u];
            }
        }
        input = lc.a;
        cache.layers.push_back(std::move(lc));
    }

    cache.out = Matrix(batch, 3);
    for (int r = 0; r < batch; ++r) {
        for (int t = 0; t < 3; ++t) {
            double acc = model.out_b[static_cast<std::size_t>(t)];
            for (int c = 0; c < model.out_w.cols; ++c) acc += model.out_w(t, c) * input(r, c);
            cache.out(r, t) = acc;
        }
    }
    return cache;
}

double kernel_penalty(const MlpModel& model) {
    double acc = 0.0;
    for (const auto& layer : model.hidden) {
        for (double v : layer.w.data) acc += v * v;
    }
    for (double v : model.out_w.data) acc += v * v;
    return model.config.l2 * acc;
}

MlpGradients zero_gradients(const MlpModel& model) {
    MlpGradients g;
    for (const auto& layer : model.hidden) {
        MlpLayer gl;
        gl.w = Matrix(layer.w.rows, layer.w.cols);
        gl.b.assign(layer.b.size(), 0.0);
        gl.gamma.assign(layer.gamma.size(), 0.0);
        gl.beta.assign(layer.beta.size(), 0.0);
        g.hidden.push_back(std::move(gl));
    }
    g.out_w = Matrix(model.out_w.rows, model.out_w.cols);
    return g;
}

double loss_and_backward(const MlpModel& model, const Matrix& x,
                         const std::vector<MotilityLabel>& y, bool inference_bn,
                         const std::vector<std::vector<double>>* drop_masks,
                         std::vector<MlpLayer>* running_updates, MlpGradients* grads) {
    const int batch = x.rows;
    const ForwardCache cache = forward(model, x, inference_bn, drop_masks, running_updates);

    double mse = 0.0;
    Matrix d_out(batch, 3);
    for (int r = 0; r < batch; ++r) {
        const auto truth = y[static_cast<std::size_t>(r)].as_array();
        for (int t = 0; t < 3; ++t) {
            const double diff = cache.out(r, t) - truth[static_cast<std::size_t>(t)];
            mse += diff * diff;
            d_out(r, t) = 2.0 * diff / (3.0 * batch);
        }
    }
    mse /= 3.0 * batch;
    const double loss = mse + kernel_penalty(model);
    if (!grads) return loss;

    *grads = zero_gradients(model);

    const Matrix& last_a =
        model.hidden.empty() ? x : cache.layers.back().a;
    for (int t = 0; t < 3; ++t) {
        for (int c = 0; c < model.out_w.cols; ++c) {
            double acc = 2.0 * model.config.l2 * model.out_w(t, c);
            for (int r = 0; r < batch; ++r) acc += d_out(r, t) * last_a(r, c);
            grads->out_w(t, c) = acc;
        }
        double acc = 0.0;
        for (int r = 0; r < batch; ++r) acc += d_out(r, t);
        grads->out_b[static_cast<std::size_t>(t)] = acc;
    }

    // Gradient wrt the last hidden activation.
    Matrix d_a(batch, model.out_w.cols);
    for (int r = 0; r < batch; ++r) {
        for (int c = 0; c < model.out_w.cols; ++c) {
            double acc = 0.0;
            for (int t = 0; t < 3; ++t) acc += d_out(r, t) * model.out_w(t, c);
            d_a(r, c) = acc;
        }
    }

    for (int l = static_cast<int>(model.hidden.size()) - 1; l >= 0; --l) {
        const MlpLayer& layer = model.hidden[static_cast<std::size_t>(l)];
        const LayerCache& lc = cache.layers[static_cast<std::size_t>(l)];
        MlpLayer& gl = grads->hidden[static_cast<std::size_t>(l)];
        const int units = layer.w.rows;

        // Through dropout and the activation.
        Matrix d_y(batch, units);
        for (int r = 0; r < batch; ++r) {
            for (int u = 0; u < units; ++u) {
                const double mask = lc.drop_mask[static_cast<std::size_t>(r) * units + u];
                const double act_out = mask != 0.0 ? lc.a(r, u) / mask : 0.0;
                d_y(r, u) = d_a(r, u) * mask *
                            activate_grad(model.config.activation, lc.y(r, u), act_out);
            }
        }

        // Batch norm backward.
        Matrix d_z(batch, units);
        for (int u = 0; u < units; ++u) {
            double d_gamma = 0.0, d_beta = 0.0;
            for (int r = 0; r < batch; ++r) {
                d_gamma += d_y(r, u) * lc.x_hat(r, u);
                d_beta += d_y(r, u);
            }
            gl.gamma[static_cast<std::size_t>(u)] = d_gamma;
            gl.beta[static_cast<std::size_t>(u)] = d_beta;

            const double inv_sd = 1.0 / std::sqrt(lc.var[static_cast<std::size_t>(u)] + kBnEps);
            const double g = layer.gamma[static_cast<std::size_t>(u)];
            if (inference_bn) {
                for (int r = 0; r < batch; ++r) d_z(r, u) = d_y(r, u) * g * inv_sd;
            } else {
                double sum_dxh = 0.0, sum_dxh_xh = 0.0;
                for (int r = 0; r < batch; ++r) {
                    const double dxh = d_y(r, u) * g;
                    sum_dxh += dxh;
                    sum_dxh_xh += dxh * lc.x_hat(r, u);
                }
                for (int r = 0; r < batch; ++r) {
                    const double dxh = d_y(r, u) * g;
                    d_z(r, u) = inv_sd * (dxh - sum_dxh / batch -
                                          lc.x_hat(r, u) * sum_dxh_xh / batch);
                }
            }
        }

        // Dense backward.
        const Matrix& prev_a =
            l == 0 ? x : cache.layers[static_cast<std::size_t>(l - 1)].a;
        for (int u = 0; u < units; ++u) {
            for (int c = 0; c < layer.w.cols; ++c) {
                double acc = 2.0 * model.config.l2 * layer.w(u, c);
                for (int r = 0; r < batch; ++r) acc += d_z(r, u) * prev_a(r, c);
                gl.w(u, c) = acc;
            }
            double acc = 0.0;
            for (int r = 0; r < batch; ++r) acc += d_z(r, u);
            gl.b[static_cast<std::size_t>(u)] = acc;
        }
        if (l > 0) {
            Matrix d_prev(batch, layer.w.cols);
            for (int r = 0; r < batch; ++r) {
                for (int c = 0; c < layer.w.cols; ++c) {
                    double acc = 0.0;
                    for (int u = 0; u < units; ++u) acc += d_z(r, u) * layer.w(u, c);
                    d_prev(r, c) = acc;
                }
            }
            d_a = std::move(d_prev);
        }
    }
    return loss;
}

// Adam state mirrors the gradient layout.
struct AdamState {
    MlpGradients m;
    MlpGradients v;
    long step = 0;
};

void adam_update(MlpModel& model, const MlpGradients& g, AdamState& state) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    state.step += 1;
    const double lr = model.config.learning_rate;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    auto update = [&](double& param, double grad, double& m, double& v) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad * grad;
        param -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
    };

    for (std::size_t l = 0; l < model.hidden.size(); ++l) {
        auto& layer = model.hidden[l];
        const auto& gl = g.hidden[l];
        auto& ml = state.m.hidden[l];
        auto& vl = state.v.hidden[l];
        for (std::size_t i = 0; i < layer.w.data.size(); ++i)
            update(layer.w.data[i], gl.w.data[i], ml.w.data[i], vl.w.data[i]);
        for (std::size_t i = 0; i < layer.b.size(); ++i)
            update(layer.b[i], gl.b[i], ml.b[i], vl.b[i]);
        for (std::size_t i = 0; i < layer.gamma.size(); ++i)
            update(layer.gamma[i], gl.gamma[i], ml.gamma[i], vl.gamma[i]);
        for (std::size_t i = 0; i < layer.beta.size(); ++i)
            update(layer.beta[i], gl.beta[i], ml.beta[i], vl.beta[i]);
    }
    for (std::size_t i = 0; i < model.out_w.data.size(); ++i)
        update(model.out_w.data[i], g.out_w.data[i], state.m.out_w.data[i],
               state.v.out_w.data[i]);
    for (std::size_t i = 0; i < 3; ++i)
        update(model.out_b[i], g.out_b[i], state.m.out_b[i], state.v.out_b[i]);
}

// Clipped MAE/RMSE over a subset of rows.
void eval_subset(const MlpModel& model, const Matrix& x,
                 const std::vector<MotilityLabel>& y, const std::vector<int>& idx,
                 double& mae, double& rmse) {
    double abs_sum = 0.0, sq_sum = 0.0;
    for (int i : idx) {
        const auto raw = model.predict_raw(x.row(i));
        const auto truth = y[static_cast<std::size_t>(i)].as_array();
        for (int t = 0; t < 3; ++t) {
            const double pred = std::clamp(raw[static_cast<std::size_t>(t)], 0.0, 100.0);
            const double err = pred - truth[static_cast<std::size_t>(t)];
            abs_sum += std::abs(err);
            sq_sum += err * err;
        }
    }
    const double n = 3.0 * static_cast<double>(idx.size());
    mae = abs_sum / n;
    rmse = std::sqrt(sq_sum / n);
}

} // namespace

std::string to_string(Activation act) {
    return act == Activation::elu ? "elu" : "relu";
}

Activation activation_from_string(const std::string& name) {
    if (name == "elu") return Activation::elu;
    if (name == "relu") return Activation::relu;
    throw ParamError("unknown activation '" + name + "'");
}

std::array<double, 3> MlpModel::predict_raw(std::span<const double> row) const {
    Matrix x(1, static_cast<int>(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) x(0, c) = row[c];
    const ForwardCache cache = forward(*this, x, true, nullptr, nullptr);
    return {cache.out(0, 0), cache.out(0, 1), cache.out(0, 2)};
}

MlpModel init_mlp(const MlpConfig& config, int input_dim, std::uint64_t seed) {
    if (config.layers < 1) throw ParamError("layers must be >= 1");
    if (config.units < 1) throw ParamError("units must be >= 1");
    if (input_dim < 1) throw ParamError("input_dim must be >= 1");

    Rng rng(seed);
    MlpModel model;
    model.config = config;
    model.input_dim = input_dim;

    int fan_in = input_dim;
    for (int l = 0; l < config.layers; ++l) {
        MlpLayer layer;
        layer.w = Matrix(config.units, fan_in);
        const double limit = std::sqrt(3.0 / fan_in);
        for (auto& v : layer.w.data) v = rng.uniform(-limit, limit);
        layer.b.assign(static_cast<std::size_t>(config.units), 0.0);
        layer.gamma.assign(static_cast<std::size_t>(config.units), 1.0);
        layer.beta.assign(static_cast<std::size_t>(config.units), 0.0);
        layer.run_mean.assign(static_cast<std::size_t>(config.units), 0.0);
        layer.run_var.assign(static_cast<std::size_t>(config.units), 1.0);
        model.hidden.push_back(std::move(layer));
        fan_in = config.units;
    }
    model.out_w = Matrix(3, fan_in);
    const double limit = std::sqrt(3.0 / fan_in);
    for (auto& v : model.out_w.data) v = rng.uniform(-limit, limit);
    return model;
}

double mlp_loss(const MlpModel& model, const Matrix& x,
                const std::vector<MotilityLabel>& y, bool inference_bn,
                MlpGradients* grads) {
    return loss_and_backward(model, x, y, inference_bn, nullptr, nullptr, grads);
}

MlpModel train_mlp_single(const Matrix& x, const std::vector<MotilityLabel>& y,
                          const MlpConfig& config, std::uint64_t seed,
                          double* val_mae, double* val_rmse) {
    if (x.rows != static_cast<int>(y.size()))
        throw TrainError("feature rows and labels are misaligned");
    if (x.rows == 0) throw TrainError("no training rows");
    for (double v : x.data) {
        if (!std::isfinite(v)) throw TrainError("non-finite feature value");
    }

    Rng rng(seed);
    MlpModel model = init_mlp(config, x.cols, rng.next_u64());

    // Random validation split.
    std::vector<int> order(static_cast<std::size_t>(x.rows));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    int n_val = static_cast<int>(std::lround(config.val_fraction * x.rows));
    if (x.rows >= 2) n_val = std::max(1, n_val);
    n_val = std::min(n_val, x.rows - 1);
    std::vector<int> val_idx(order.begin(), order.begin() + std::max(0, n_val));
    std::vector<int> train_idx(order.begin() + std::max(0, n_val), order.end());
    if (val_idx.empty()) val_idx = train_idx;

    double best_mae = std::numeric_limits<double>::infinity();
    double best_rmse = std::numeric_limits<double>::infinity();
    MlpModel best_model = model;
    eval_subset(model, x, y, val_idx, best_mae, best_rmse);

    AdamState adam{zero_gradients(model), zero_gradients(model), 0};
    MlpGradients grads;
    int since_best = 0;
    const int units = config.units;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
            const int batch = static_cast<int>(stop - start);
            Matrix xb(batch, x.cols);
            std::vector<MotilityLabel> yb;
            yb.reserve(static_cast<std::size_t>(batch));
            for (int r = 0; r < batch; ++r) {
                const int src = train_idx[start + static_cast<std::size_t>(r)];
                for (int c = 0; c < x.cols; ++c) xb(r, c) = x(src, c);
                yb.push_back(y[static_cast<std::size_t>(src)]);
            }

            // Inverted dropout masks per hidden layer.
            std::vector<std::vector<double>> masks(model.hidden.size());
            for (auto& mask : masks) {
                mask.assign(static_cast<std::size_t>(batch) * units, 1.0);
                if (config.dropout > 0.0) {
                    const double keep = 1.0 - config.dropout;
                    for (auto& m : mask)
                        m = rng.uniform() < keep ? 1.0 / keep : 0.0;
                }
            }

            const double loss =
                loss_and_backward(model, xb, yb, false, &masks, &model.hidden, &grads);
            if (!std::isfinite(loss)) throw TrainError("training diverged (non-finite loss)");
            adam_update(model, grads, adam);
        }

        double mae = 0.0, rmse = 0.0;
        eval_subset(model, x, y, val_idx, mae, rmse);
        if (mae < best_mae) {
            best_mae = mae;
            best_rmse = rmse;
            best_model = model;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    if (val_mae) *val_mae = best_mae;
    if (val_rmse) *val_rmse = best_rmse;
    return best_model;
}

std::vector<MlpConfig> sample_search_configs(const MlpSearchSpace& space, int draws,
                                             std::uint64_t seed, int max_epochs,
                                             int patience) {
    Rng rng(seed);
    auto pick = [&rng](const auto& options) {
        return options[static_cast<std::size_t>(rng.below(options.size()))];
    };
    std::vector<MlpConfig> configs;
    for (int i = 0; i < draws; ++i) {
        MlpConfig config;
        config.batch_size = pick(space.batch_sizes);
        config.dropout = pick(space.dropouts);
        config.l2 = pick(space.l2s);
        config.activation = pick(space.activations);
        config.layers = pick(space.layer_counts);
        config.learning_rate = pick(space.learning_rates);
        config.units = pick(space.unit_counts);
        config.max_epochs = max_epochs;
        config.patience = patience;
        configs.push_back(config);
    }
    return configs;
}

MlpModel train_mlp(const Matrix& x, const std::vector<MotilityLabel>& y,
                   const MlpSearchSpace& space, int draws, std::uint64_t seed,
                   int max_epochs, int patience, double* val_mae, double* val_rmse) {
    if (draws < 1) throw ParamError("draws must be >= 1");
    const auto configs = sample_search_configs(space, draws, seed, max_epochs, patience);

    double best_mae = std::numeric_limits<double>::infinity();
    double best_rmse = std::numeric_limits<double>::infinity();
    MlpModel best;
    bool found = false;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        double mae = 0.0, rmse = 0.0;
        try {
            MlpModel model = train_mlp_single(
                x, y, configs[i], seed + 7919 * (static_cast<std::uint64_t>(i) + 1), &mae,
                &rmse);
            if (mae < best_mae) {
                best_mae = mae;
                best_rmse = rmse;
                best = std::move(model);
                found = true;
            }
        } catch (const TrainError& e) {
            std::cerr << "mlp search draw " << i << " discarded: " << e.what() << "\n";
        }
    }
    if (!found) throw TrainError("every search draw diverged");
    if (val_mae) *val_mae = best_mae;
    if (val_rmse) *val_rmse = best_rmse;
    return best;
}

} // namespace motil
