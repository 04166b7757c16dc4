#ifndef MOTIL_MLP_HPP
#define MOTIL_MLP_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "motil/labels.hpp"
#include "motil/matrix.hpp"

namespace motil {

enum class Activation { elu, relu };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

struct MlpConfig {
    int layers = 2; // hidden layers
    int units = 256;
    Activation activation = Activation::relu;
    double learning_rate = 1e-3;
    double dropout = 0.2;
    double l2 = 1e-4; // kernel regularization factor
    int batch_size = 16;
    int max_epochs = 1000;
    int patience = 100;          // epochs without val improvement
    double val_fraction = 0.2;   // random validation split of training data
};

// Fully connected block: dense -> batch norm -> activation (-> dropout).
// Batch norm is applied before the activation; running statistics are kept
// for inference.
struct MlpLayer {
    Matrix w; // units_out x units_in
    std::vector<double> b;
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> run_mean;
    std::vector<double> run_var;
};

struct MlpModel {
    MlpConfig config;
    int input_dim = 0;
    std::vector<MlpLayer> hidden;
    Matrix out_w; // 3 x units
    std::array<double, 3> out_b{};

    // Raw (unclipped) three-target outputs, inference mode.
    std::array<double, 3> predict_raw(std::span<const double> row) const;
};

// Initialization only (scaled-uniform fan-in weights); lets a zero-epoch
// budget produce a usable model.
MlpModel init_mlp(const MlpConfig& config, int input_dim, std::uint64_t seed);

// Parameter gradients in the same shapes as the model.
struct MlpGradients {
    std::vector<MlpLayer> hidden;
    Matrix out_w;
    std::array<double, 3> out_b{};
};

// Loss (MSE + l2 * sum of squared kernel weights) and, when grads is given,
// full backpropagation. inference_bn switches batch norm to its running
// statistics, which makes the network a fixed composition of affine maps
// and activations (used by the finite-difference gradient check). Dropout
// is not applied here.
double mlp_loss(const MlpModel& model, const Matrix& x,
                const std::vector<MotilityLabel>& y, bool inference_bn,
                MlpGradients* grads);

// Trains one configuration with Adam and early stopping on a random
// validation split; returns the model at its best validation epoch.
MlpModel train_mlp_single(const Matrix& x, const std::vector<MotilityLabel>& y,
                          const MlpConfig& config, std::uint64_t seed,
                          double* val_mae = nullptr, double* val_rmse = nullptr);

// The paper's random-search table.
struct MlpSearchSpace {
    std::vector<int> batch_sizes{16, 32, 64};
    std::vector<double> dropouts{0.2, 0.4};
    std::vector<double> l2s{1e-4, 1e-3, 1e-2};
    std::vector<Activation> activations{Activation::elu, Activation::relu};
    std::vector<int> layer_counts{2, 4, 8};
    std::vector<double> learning_rates{1e-4, 1e-3, 1e-2};
    std::vector<int> unit_counts{256, 512, 1024};
};

// Draws `draws` configurations uniformly from the space (seeded), trains
// each, and returns the model with the lowest validation MAE. Diverged
// draws (non-finite loss) are discarded and logged to stderr.
MlpModel train_mlp(const Matrix& x, const std::vector<MotilityLabel>& y,
                   const MlpSearchSpace& space, int draws, std::uint64_t seed,
                   int max_epochs = 1000, int patience = 100,
                   double* val_mae = nullptr, double* val_rmse = nullptr);

// The sequence of configurations a seeded search would explore.
std::vector<MlpConfig> sample_search_configs(const MlpSearchSpace& space, int draws,
                                             std::uint64_t seed, int max_epochs,
                                             int patience);

} // namespace motil

#endif
