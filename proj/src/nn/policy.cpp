#include "sct/nn/policy.hpp"

#include <cstdio>

#include "sct/errors.hpp"

namespace sct::nn {

VectorXd GradientPolicy::theta(const VectorXd& w) const {
    const VectorXd ybar = c + G.transpose() * gradient(w);
    VectorXd out = VectorXd::Zero(ybar.size());
    for (Eigen::Index j = 0; j < ybar.size(); ++j)
        if (ybar[j] < 0.0) out[j] = b;
    return out;
}

std::vector<bool> GradientPolicy::active(const VectorXd& w) const {
    const VectorXd ybar = c + G.transpose() * gradient(w);
    std::vector<bool> out(ybar.size());
    for (Eigen::Index j = 0; j < ybar.size(); ++j) out[j] = ybar[j] < 0.0;
    return out;
}

GradientPolicy extract_policy(const Mlp& g_net, const ControlProblem& pr) {
    GradientPolicy policy;
    policy.g_net = g_net;
    policy.G = pr.G;
    policy.c = pr.c;
    policy.b = pr.b;
    policy.n_scale = pr.n_scale;
    return policy;
}

void export_heatmap_csv(const std::string& path, const GradientPolicy& policy, double w1_max,
                        double w2_max, int n1, int n2) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ArtifactMissing("cannot open heatmap output: " + path);
    std::fprintf(f, "w1,w2,control_index,active\n");
    const int d = policy.g_net.input_dim();
    const int p = static_cast<int>(policy.G.cols());
    VectorXd w = VectorXd::Zero(d);
    for (int i = 0; i <= n1; ++i) {
        const double w1 = w1_max * i / n1;
        const int j_hi = (d >= 2) ? n2 : 0;
        for (int j = 0; j <= j_hi; ++j) {
            const double w2 = (d >= 2) ? w2_max * j / n2 : 0.0;
            w[0] = w1;
            if (d >= 2) w[1] = w2;
            const auto mask = policy.active(w);
            for (int k = 0; k < p; ++k)
                std::fprintf(f, "%.6f,%.6f,%d,%d\n", w1, w2, k, mask[k] ? 1 : 0);
        }
    }
    std::fclose(f);
}

}  // namespace sct::nn
