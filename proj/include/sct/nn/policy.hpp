#pragma once

#include <string>
#include <vector>

#include "sct/nn/mlp.hpp"
#include "sct/problems.hpp"

namespace sct::nn {

/// Bang-bang drift policy read off a trained gradient network:
/// theta_j(w) = b when (c + G^T G_net(w))_j < 0, else 0.
struct GradientPolicy {
    Mlp g_net;
    MatrixXd G;
    VectorXd c;
    double b = 0.0;
    double n_scale = 1.0;

    VectorXd theta(const VectorXd& w) const;
    /// Region classifier: active flag per control component.
    std::vector<bool> active(const VectorXd& w) const;
    VectorXd gradient(const VectorXd& w) const { return g_net.forward_vec(w); }
};

GradientPolicy extract_policy(const Mlp& g_net, const ControlProblem& pr);

/// Heatmap rows `w1,w2,control_index,active` with fixed 6-decimal formatting;
/// one row per grid node per control component. For one-dimensional problems
/// w2 is written as 0.
void export_heatmap_csv(const std::string& path, const GradientPolicy& policy,
                        double w1_max, double w2_max, int n1, int n2);

}  // namespace sct::nn
