#pragma once

#include <cstdint>
#include <vector>

#include "sct/brownian.hpp"
#include "sct/nn/mlp.hpp"
#include "sct/problems.hpp"

namespace sct::nn {

/// Training configuration; defaults mirror the common hyperparameters
/// (T = 0.1, dt = T/64, batch 256) and per-instance values come from the catalog.
struct SolverConfig {
    double T = 0.1;
    int num_steps = 64;
    int batch = 256;
    long iterations = 6000;
    int epochs = 34;
    int hidden_layers = 3;
    int neurons = 50;
    std::vector<std::pair<long, double>> lr_schedule{{0, 5e-4}, {3000, 3e-4}, {9000, 1e-4}};
    double shape_weight = 1.0;
    ShapeKind shape = ShapeKind::none;
    BoundSchedule bound_schedule;
    uint64_t seed = 1;
    NormalMethod normal_method = NormalMethod::inverse_cdf;
    VectorXd theta_tilde;  // empty -> problem default
    double b = 0.0;        // 0 -> problem default

    double dt() const { return T / num_steps; }
    double lr_at(long iteration) const;
    static SolverConfig from_problem(const ControlProblem& pr);
};

/// g(u) = min over theta in [0,b]^p of (c + G^T u) . theta  -  (G^T u) . theta_tilde
///      = sum_j b * min(0, (c + G^T u)_j)  -  (G^T u) . theta_tilde.
double hamiltonian_g(const VectorXd& u, const VectorXd& c, const MatrixXd& G, double b,
                     const VectorXd& theta_tilde);

/// Batch of discretized reference paths, path-major rows (n*K + k).
struct PathBatch {
    int N = 0, K = 0, d = 0;
    double dt = 0.0, T = 0.0;
    Mat W0;      // N x d
    Mat WT;      // N x d
    Mat states;  // (N*K) x d, left endpoints
    Mat dB;      // (N*K) x d
    Mat dY;      // (N*K) x d

    sct::ReflectedPath path(int n) const;  // single-path view for diagnostics
};

/// Simulates N reference paths over [0, T] under the constant nominal drift
/// theta_tilde, reflected at the boundary; retains dB and dY per step.
/// Path n draws from RNG stream `stream_offset + n`.
PathBatch simulate_reference_batch(const ControlProblem& pr, const SolverConfig& cfg,
                                   uint64_t seed, uint64_t stream_offset = 0,
                                   const Mat* start_states = nullptr);

/// Everything the residual needs besides the two networks.
struct LossSpec {
    double gamma = 0.0;
    VectorXd c;
    MatrixXd G;
    double b = 0.0;
    VectorXd theta_tilde;
    VectorXd pi_hat;
    const HoldingCost* h = nullptr;

    static LossSpec from_problem(const ControlProblem& pr, double b_eff);
};

struct LossBreakdown {
    double total = 0.0;
    double mean_sq = 0.0;
    Eigen::VectorXd per_path;       // Delta_n
    Eigen::VectorXd martingale;     // sum_k disc * G(W) . dB
    Eigen::VectorXd running_h;      // sum_k disc * h(W) dt
    Eigen::VectorXd running_g;      // sum_k disc * g(G(W)) dt
    Eigen::VectorXd boundary;       // sum_k disc * pi_hat . dY
};

/// Mean of Delta_n^2 for arbitrary (V, grad V) callables; the tape-based
/// training loss reproduces this value for Mlp networks.
LossBreakdown loss_residual_detailed(const PathBatch& paths,
                                     const std::function<double(const VectorXd&)>& v_fn,
                                     const std::function<VectorXd(const VectorXd&)>& g_fn,
                                     const LossSpec& spec);

double loss_residual(const PathBatch& paths, const Mlp& v_net, const Mlp& g_net,
                     const ControlProblem& pr);

/// Training objective (residual mean square plus weighted shape penalty) and
/// its gradients with respect to every parameter tensor of both networks.
struct LossGrads {
    double loss = 0.0;
    std::vector<Mat> v_W, v_b, g_W, g_b;
};
LossGrads training_loss_gradients(const PathBatch& paths, const Mlp& v_net, const Mlp& g_net,
                                  const LossSpec& spec, ShapeKind shape, double shape_weight);

/// Shape-constraint penalty evaluated at the given states (rows).
double shape_penalty(ShapeKind kind, const Mlp& g_net, const Mat& states);

struct TrainResult {
    Mlp v_net;
    Mlp g_net;
    std::vector<double> loss_history;
};

/// Joint training of (V, grad V) by Adam on the squared reference-SDE residual
/// plus the configured shape penalty. Deterministic for a fixed seed.
/// Throws DivergedLoss on NaN/inf.
TrainResult train(const ControlProblem& pr, const SolverConfig& cfg);

}  // namespace sct::nn
