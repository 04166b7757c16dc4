#include "motil/model.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "motil/errors.hpp"

namespace motil {

using nlohmann::json;

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::svr: return "svr";
        case ModelKind::mlp: return "mlp";
        case ModelKind::zeror: return "zeror";
    }
    return "zeror";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "svr") return ModelKind::svr;
    if (name == "mlp") return ModelKind::mlp;
    if (name == "zeror") return ModelKind::zeror;
    throw ParamError("unknown model kind '" + name + "'");
}

Model make_zeror(const std::vector<MotilityLabel>& y, int feature_dim) {
    if (y.empty()) throw TrainError("zeror needs at least one label");
    Model model;
    model.kind = ModelKind::zeror;
    model.feature_dim = feature_dim;
    for (const auto& label : y) {
        model.zeror_mean.progressive += label.progressive;
        model.zeror_mean.non_progressive += label.non_progressive;
        model.zeror_mean.immotile += label.immotile;
    }
    const double n = static_cast<double>(y.size());
    model.zeror_mean.progressive /= n;
    model.zeror_mean.non_progressive /= n;
    model.zeror_mean.immotile /= n;
    return model;
}

std::vector<MotilityLabel> predict(const Model& model, const Matrix& x) {
    if (model.kind != ModelKind::zeror && x.cols != model.feature_dim)
        throw PredictError("feature dimension " + std::to_string(x.cols) +
                           " does not match the model's " +
                           std::to_string(model.feature_dim));

    std::vector<MotilityLabel> out;
    out.reserve(static_cast<std::size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) {
        std::array<double, 3> raw{};
        switch (model.kind) {
            case ModelKind::svr: raw = model.svr.predict_raw(x.row(r)); break;
            case ModelKind::mlp: raw = model.mlp.predict_raw(x.row(r)); break;
            case ModelKind::zeror: raw = model.zeror_mean.as_array(); break;
        }
        for (auto& v : raw) v = std::clamp(v, 0.0, 100.0);
        out.push_back(MotilityLabel::from_array(raw));
    }
    return out;
}

std::vector<MotilityLabel> aggregate_by_video(const std::vector<std::string>& video_ids,
                                              const std::vector<MotilityLabel>& preds,
                                              std::vector<std::string>* out_ids) {
    if (video_ids.size() != preds.size())
        throw PredictError("video ids and predictions are misaligned");

    std::vector<std::string> order;
    std::map<std::string, std::pair<MotilityLabel, int>> acc;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto [it, inserted] = acc.try_emplace(video_ids[i], MotilityLabel{}, 0);
        if (inserted) order.push_back(video_ids[i]);
        it->second.first.progressive += preds[i].progressive;
        it->second.first.non_progressive += preds[i].non_progressive;
        it->second.first.immotile += preds[i].immotile;
        it->second.second += 1;
    }

    std::vector<MotilityLabel> out;
    for (const auto& id : order) {
        const auto& [sum, n] = acc.at(id);
        out.push_back({sum.progressive / n, sum.non_progressive / n, sum.immotile / n});
    }
    if (out_ids) *out_ids = order;
    return out;
}

namespace {

json scaler_to_json(const Scaler& s) {
    return json{{"kind", to_string(s.kind)}, {"offset", s.offset}, {"scale", s.scale}};
}

Scaler scaler_from_json(const json& j) {
    Scaler s;
    s.kind = scaler_from_string(j.at("kind").get<std::string>());
    s.offset = j.at("offset").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    return s;
}

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    m.data = j.at("data").get<std::vector<double>>();
    return m;
}

} // namespace

void save_model(const std::filesystem::path& path, const Model& model) {
    json j;
    j["format_version"] = 1;
    j["kind"] = to_string(model.kind);
    j["feature_dim"] = model.feature_dim;
    switch (model.kind) {
        case ModelKind::svr: {
            json s;
            s["scaler"] = scaler_to_json(model.svr.scaler);
            s["c"] = model.svr.c;
            s["epsilon"] = model.svr.epsilon;
            s["weights"] = {model.svr.weights[0], model.svr.weights[1],
                            model.svr.weights[2]};
            s["bias"] = model.svr.bias;
            j["svr"] = std::move(s);
            break;
        }
        case ModelKind::mlp: {
            json m;
            m["layers"] = model.mlp.config.layers;
            m["units"] = model.mlp.config.units;
            m["activation"] = to_string(model.mlp.config.activation);
            m["learning_rate"] = model.mlp.config.learning_rate;
            m["dropout"] = model.mlp.config.dropout;
            m["l2"] = model.mlp.config.l2;
            m["batch_size"] = model.mlp.config.batch_size;
            m["input_dim"] = model.mlp.input_dim;
            json layers = json::array();
            for (const auto& layer : model.mlp.hidden) {
                layers.push_back(json{{"w", matrix_to_json(layer.w)},
                                      {"b", layer.b},
                                      {"gamma", layer.gamma},
                                      {"beta", layer.beta},
                                      {"run_mean", layer.run_mean},
                                      {"run_var", layer.run_var}});
            }
            m["hidden"] = std::move(layers);
            m["out_w"] = matrix_to_json(model.mlp.out_w);
            m["out_b"] = model.mlp.out_b;
            j["mlp"] = std::move(m);
            break;
        }
        case ModelKind::zeror: {
            j["zeror"] = {model.zeror_mean.progressive, model.zeror_mean.non_progressive,
                          model.zeror_mean.immotile};
            break;
        }
    }

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IngestError(path.string() + ": invalid model json: " + e.what());
    }

    Model model;
    try {
        model.kind = model_kind_from_string(j.at("kind").get<std::string>());
        model.feature_dim = j.at("feature_dim").get<int>();
        switch (model.kind) {
            case ModelKind::svr: {
                const json& s = j.at("svr");
                model.svr.scaler = scaler_from_json(s.at("scaler"));
                model.svr.c = s.at("c").get<double>();
                model.svr.epsilon = s.at("epsilon").get<double>();
                for (int t = 0; t < 3; ++t) {
                    model.svr.weights[static_cast<std::size_t>(t)] =
                        s.at("weights")[static_cast<std::size_t>(t)]
                            .get<std::vector<double>>();
                    model.svr.bias[static_cast<std::size_t>(t)] =
                        s.at("bias")[static_cast<std::size_t>(t)].get<double>();
                }
                break;
            }
            case ModelKind::mlp: {
                const json& m = j.at("mlp");
                model.mlp.config.layers = m.at("layers").get<int>();
                model.mlp.config.units = m.at("units").get<int>();
                model.mlp.config.activation =
                    activation_from_string(m.at("activation").get<std::string>());
                model.mlp.config.learning_rate = m.at("learning_rate").get<double>();
                model.mlp.config.dropout = m.at("dropout").get<double>();
                model.mlp.config.l2 = m.at("l2").get<double>();
                model.mlp.config.batch_size = m.at("batch_size").get<int>();
                model.mlp.input_dim = m.at("input_dim").get<int>();
                for (const auto& jl : m.at("hidden")) {
                    MlpLayer layer;
                    layer.w = matrix_from_json(jl.at("w"));
                    layer.b = jl.at("b").get<std::vector<double>>();
                    layer.gamma = jl.at("gamma").get<std::vector<double>>();
                    layer.beta = jl.at("beta").get<std::vector<double>>();
                    layer.run_mean = jl.at("run_mean").get<std::vector<double>>();
                    layer.run_var = jl.at("run_var").get<std::vector<double>>();
                    model.mlp.hidden.push_back(std::move(layer));
                }
                model.mlp.out_w = matrix_from_json(m.at("out_w"));
                for (int t = 0; t < 3; ++t)
                    model.mlp.out_b[static_cast<std::size_t>(t)] =
                        m.at("out_b")[static_cast<std::size_t>(t)].get<double>();
                break;
            }
            case ModelKind::zeror: {
                model.zeror_mean.progressive = j.at("zeror")[0].get<double>();
                model.zeror_mean.non_progressive = j.at("zeror")[1].get<double>();
                model.zeror_mean.immotile = j.at("zeror")[2].get<double>();
                break;
            }
        }
    } catch (const json::exception& e) {
        throw IngestError(path.string() + ": malformed model json: " + e.what());
    }
    return model;
}

} // namespace motil
