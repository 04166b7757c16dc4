#ifndef MOTIL_MODEL_HPP
#define MOTIL_MODEL_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "motil/labels.hpp"
#include "motil/matrix.hpp"
#include "motil/mlp.hpp"
#include "motil/svr.hpp"

namespace motil {

enum class ModelKind { svr, mlp, zeror };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Trained regression head. Exactly the member matching `kind` is meaningful.
struct Model {
    ModelKind kind = ModelKind::zeror;
    SvrModel svr;
    MlpModel mlp;
    MotilityLabel zeror_mean;
    int feature_dim = 0;
};

Model make_zeror(const std::vector<MotilityLabel>& y, int feature_dim);

// Three-target prediction with each component clipped to [0, 100].
std::vector<MotilityLabel> predict(const Model& model, const Matrix& x);

// Mean-aggregates row predictions that share a video id; out_ids receives
// the video ids in first-appearance order.
std::vector<MotilityLabel> aggregate_by_video(const std::vector<std::string>& video_ids,
                                              const std::vector<MotilityLabel>& preds,
                                              std::vector<std::string>* out_ids = nullptr);

// model.json round trip (versioned, discriminated by kind).
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

} // namespace motil

#endif
