#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sct/nn/tape.hpp"

namespace sct::nn {

/// Fully connected net with elu hidden activations and a linear output layer.
/// Weights are (in x out); inputs are row vectors, batches are row-major.
class Mlp {
public:
    std::vector<Mat> W;
    std::vector<Mat> b;  // 1 x out

    static Mlp create(int input, int hidden, int hidden_layers, int output, uint64_t seed);

    int input_dim() const { return static_cast<int>(W.front().rows()); }
    int output_dim() const { return static_cast<int>(W.back().cols()); }
    int layer_count() const { return static_cast<int>(W.size()); }

    Mat forward(const Mat& X) const;
    Eigen::VectorXd forward_vec(const Eigen::VectorXd& x) const;
    double forward_scalar(const Eigen::VectorXd& x) const;

    /// Directional input derivative d(output)/d(direction) for every row of X.
    Mat input_jvp(const Mat& X, const Eigen::VectorXd& direction) const;

    /// Flat binary checkpoint: magic, JSON header of shapes, then layer-ordered
    /// little-endian 64-bit floats (W then b per layer).
    void save(const std::string& path) const;
    static Mlp load(const std::string& path);

    bool finite() const;
};

/// Tape handles for one network's parameters.
struct MlpVars {
    std::vector<int> W_ids;
    std::vector<int> b_ids;
};

MlpVars bind_params(Tape& tape, const Mlp& net);
int mlp_forward(Tape& tape, const MlpVars& vars, int x);
/// Returns (output id, input-JVP id) for a fixed tangent direction applied to
/// every row; the JVP graph is itself differentiable.
std::pair<int, int> mlp_forward_jvp(Tape& tape, const MlpVars& vars, int x,
                                    const Eigen::VectorXd& direction);

/// Shared-forward variant: one output id plus one JVP id per direction.
struct ForwardWithJvps {
    int output;
    std::vector<int> jvps;
};
ForwardWithJvps mlp_forward_with_jvps(Tape& tape, const MlpVars& vars, int x,
                                      const std::vector<Eigen::VectorXd>& directions);

/// Adam with bias correction; state persists across steps.
class Adam {
public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<Mat*> params, const std::vector<const Mat*>& grads, double lr);

private:
    double beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Mat> m_, v_;
};

}  // namespace sct::nn
