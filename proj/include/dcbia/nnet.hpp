#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "dcbia/rng.hpp"

namespace dcbia::nnet {

/// Fully connected layer, y = W x + b. W is (outputs x inputs).
struct DenseLayer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};

/// Feed-forward regressor: ReLU on every hidden layer, linear output.
struct MlpNetwork {
    std::vector<int> layer_sizes;
    std::vector<DenseLayer> layers;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    bool all_finite() const;
};

/// Same shapes as MlpNetwork::layers.
using Gradients = std::vector<DenseLayer>;

struct AdamState {
    Gradients first_moment;
    Gradients second_moment;
    long long step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One column per sample.
struct TrainBatch {
    Eigen::MatrixXd contexts;
    std::vector<int> actions;
    std::vector<double> targets;

    std::size_t size() const { return actions.size(); }
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients gradients;
};

/// He-uniform weights for ReLU layers, Glorot-uniform for the linear output, zero biases.
MlpNetwork init_network(const std::vector<int>& layer_sizes, Rng& rng);

/// Zero moments shaped like `net`.
AdamState init_adam(const MlpNetwork& net, double learning_rate = 1e-3, double beta1 = 0.9,
                    double beta2 = 0.999, double epsilon = 1e-8);

Eigen::VectorXd forward(const MlpNetwork& net, const Eigen::VectorXd& x);
Eigen::MatrixXd forward_batch(const MlpNetwork& net, const Eigen::MatrixXd& x);

/// Mean over the batch of (forward(x)[a] - target)^2. Only the taken action's output
/// contributes to the gradient.
LossAndGradients loss_and_gradients(const MlpNetwork& net, const TrainBatch& batch);

/// Bias-corrected Adam update; increments adam.step once.
void adam_step(MlpNetwork& net, AdamState& adam, const Gradients& gradients);

/// Text checkpoint with hex-float values; reading it back reproduces the network bit-exactly.
void write_checkpoint(std::ostream& out, const MlpNetwork& net, const AdamState& adam);
void read_checkpoint(std::istream& in, MlpNetwork& net, AdamState& adam);

} // namespace dcbia::nnet
