#include "sct/nn/solver.hpp"

#include <cmath>

#include "sct/errors.hpp"

namespace sct::nn {

double SolverConfig::lr_at(long iteration) const {
    double lr = lr_schedule.front().second;
    for (const auto& [start, value] : lr_schedule)
        if (iteration >= start) lr = value;
    return lr;
}

SolverConfig SolverConfig::from_problem(const ControlProblem& pr) {
    SolverConfig cfg;
    cfg.iterations = pr.nn_iterations;
    cfg.epochs = pr.nn_epochs;
    cfg.neurons = pr.nn_neurons;
    cfg.lr_schedule = pr.lr_schedule;
    cfg.shape = pr.shape;
    cfg.bound_schedule = pr.bound_schedule;
    cfg.theta_tilde = pr.theta_tilde;
    cfg.b = pr.b;
    return cfg;
}

double hamiltonian_g(const VectorXd& u, const VectorXd& c, const MatrixXd& G, double b,
                     const VectorXd& theta_tilde) {
    const VectorXd gu = G.transpose() * u;
    const VectorXd ybar = c + gu;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ybar.size(); ++j) acc += b * std::min(0.0, ybar[j]);
    return acc - gu.dot(theta_tilde);
}

sct::ReflectedPath PathBatch::path(int n) const {
    sct::ReflectedPath out;
    out.W.resize(K + 1, d);
    out.dY.resize(K, d);
    out.dB.resize(K, d);
    out.W.row(0) = W0.row(n);
    for (int k = 0; k < K; ++k) {
        const Eigen::Index r = static_cast<Eigen::Index>(k) * N + n;
        out.dY.row(k) = dY.row(r);
        out.dB.row(k) = dB.row(r);
        if (k + 1 < K) out.W.row(k + 1) = states.row(r + N);
    }
    out.W.row(K) = WT.row(n);
    return out;
}

namespace {

// Batched least fixed point dy = max(0, Q dy - z) per row; rows are paths.
void reflect_rows(Mat& W, const Mat& dX, const Mat& Q, const Mat& R, Mat& dY_out) {
    const Mat Z = W + dX;
    Mat dY = Mat::Zero(Z.rows(), Z.cols());
    constexpr int kCap = 100000;
    for (int it = 0; it < kCap; ++it) {
        Mat next = (dY * Q.transpose() - Z).cwiseMax(0.0);
        const double delta = (next - dY).cwiseAbs().maxCoeff();
        dY = std::move(next);
        if (delta <= 1e-12) break;
        if (it + 1 == kCap) throw NonConvergence("batched reflection fixed point stalled");
    }
    W = Z + dY * R.transpose();
    W = W.unaryExpr([](double x) { return (x < 0.0 && x >= -1e-12) ? 0.0 : x; });
    dY_out = std::move(dY);
}

}  // namespace

PathBatch simulate_reference_batch(const ControlProblem& pr, const SolverConfig& cfg,
                                   uint64_t seed, uint64_t stream_offset,
                                   const Mat* start_states) {
    const int N = cfg.batch, K = cfg.num_steps, d = pr.d;
    const double dt = cfg.dt();
    const VectorXd theta = cfg.theta_tilde.size() ? cfg.theta_tilde : pr.theta_tilde;
    const double b = cfg.b > 0.0 ? cfg.b : pr.b;
    if ((theta.array() < -1e-12).any() || (theta.array() > b + 1e-12).any())
        throw ConfigInvalid("nominal drift must lie in [0, b]^p");

    PathBatch batch;
    batch.N = N;
    batch.K = cfg.T == 0.0 ? 0 : K;
    batch.d = d;
    batch.dt = dt;
    batch.T = cfg.T;

    Mat W = start_states ? *start_states : Mat::Zero(N, d);
    batch.W0 = W;
    if (batch.K == 0) {  // degenerate horizon: paths equal their start states
        batch.WT = W;
        batch.states.resize(0, d);
        batch.dB.resize(0, d);
        batch.dY.resize(0, d);
        return batch;
    }

    const BrownianSpec spec(VectorXd::Zero(d), CovarianceMatrix(pr.cov));
    const TimeGrid grid(cfg.T, K);
    const VectorXd mean_drift = (pr.xi + pr.G * theta) * dt;

    batch.states.resize(static_cast<Eigen::Index>(N) * K, d);
    batch.dB.resize(static_cast<Eigen::Index>(N) * K, d);
    batch.dY.resize(static_cast<Eigen::Index>(N) * K, d);

    const bool wedge = pr.space == StateSpace::wedge;
    Mat refl = wedge ? Mat(pr.chart->chart_reflection()) : pr.reflection_matrix();
    const Mat Q = Mat::Identity(d, d) - refl;
    Mat Bt, Binv_t;
    if (wedge) {
        Bt = pr.chart->B.transpose();
        Binv_t = pr.chart->B_inv.transpose();
        W = W * Bt;  // work in chart coordinates
    }

    const IncrementBatch noise = sample_noise(spec, grid, N, seed, stream_offset,
                                              cfg.normal_method);
    Mat dX(N, d), dYk;
    for (int k = 0; k < K; ++k) {
        const Eigen::Index block = static_cast<Eigen::Index>(k) * N;
        for (int n = 0; n < N; ++n) {
            const auto row = noise.data.row(static_cast<Eigen::Index>(n) * K + k);
            batch.dB.row(block + n) = row;
            dX.row(n) = row + mean_drift.transpose();
        }
        batch.states.middleRows(block, N) = wedge ? Mat(W * Binv_t) : W;
        if (wedge) dX = dX * Bt;
        reflect_rows(W, dX, Q, refl, dYk);
        batch.dY.middleRows(block, N) = dYk;
    }
    batch.WT = wedge ? Mat(W * Binv_t) : W;
    return batch;
}

LossSpec LossSpec::from_problem(const ControlProblem& pr, double b_eff) {
    LossSpec spec;
    spec.gamma = pr.gamma;
    spec.c = pr.c;
    spec.G = pr.G;
    spec.b = b_eff;
    spec.theta_tilde = pr.theta_tilde;
    spec.pi_hat = pr.pi_hat();
    spec.h = &pr.h;
    return spec;
}

LossBreakdown loss_residual_detailed(const PathBatch& paths,
                                     const std::function<double(const VectorXd&)>& v_fn,
                                     const std::function<VectorXd(const VectorXd&)>& g_fn,
                                     const LossSpec& spec) {
    const int N = paths.N, K = paths.K;
    const double dt = paths.dt;
    LossBreakdown out;
    out.per_path.setZero(N);
    out.martingale.setZero(N);
    out.running_h.setZero(N);
    out.running_g.setZero(N);
    out.boundary.setZero(N);

    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            const Eigen::Index r = static_cast<Eigen::Index>(k) * N + n;
            const double disc = std::exp(-spec.gamma * k * dt);
            const VectorXd w = paths.states.row(r).transpose();
            const VectorXd u = g_fn(w);
            out.martingale[n] += disc * u.dot(paths.dB.row(r));
            out.running_h[n] += disc * holding_cost(*spec.h, w) * dt;
            out.running_g[n] += disc * hamiltonian_g(u, spec.c, spec.G, spec.b, spec.theta_tilde) * dt;
            out.boundary[n] += disc * spec.pi_hat.dot(paths.dY.row(r));
        }
        const double vT = v_fn(paths.WT.row(n).transpose());
        const double v0 = v_fn(paths.W0.row(n).transpose());
        out.per_path[n] = std::exp(-spec.gamma * paths.T) * vT - v0 - out.martingale[n] +
                          out.running_h[n] + out.running_g[n] + out.boundary[n];
    }
    out.mean_sq = out.per_path.squaredNorm() / N;
    out.total = out.mean_sq;
    return out;
}

double loss_residual(const PathBatch& paths, const Mlp& v_net, const Mlp& g_net,
                     const ControlProblem& pr) {
    const LossSpec spec = LossSpec::from_problem(pr, pr.b);
    return loss_residual_detailed(
               paths, [&](const VectorXd& w) { return v_net.forward_scalar(w); },
               [&](const VectorXd& w) { return g_net.forward_vec(w); }, spec)
        .mean_sq;
}

double shape_penalty(ShapeKind kind, const Mlp& g_net, const Mat& states) {
    const Eigen::Index n = states.rows();
    switch (kind) {
        case ShapeKind::none:
            return 0.0;
        case ShapeKind::crisscross: {
            const Mat u = g_net.forward(states);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const bool lower = 2.0 * states(i, 0) > states(i, 1);
                const double g = lower ? u(i, 0) : u(i, 1);
                const double neg = std::max(0.0, -g);
                acc += neg * neg;
            }
            return acc / static_cast<double>(n);
        }
        case ShapeKind::threestation: {
            const Mat u = g_net.forward(states);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double n1 = std::max(0.0, -u(i, 0));
                const double n2 = std::max(0.0, -u(i, 1));
                acc += n1 * n1 + n2 * n2;
            }
            return acc / static_cast<double>(n);
        }
        case ShapeKind::tandem_chain: {
            const int d = g_net.input_dim();
            double acc = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const Mat jvp = g_net.input_jvp(states, VectorXd::Unit(d, i));
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double diff = jvp(r, i) - jvp(r, i + 1);
                    const double neg = std::max(0.0, -diff);
                    acc += neg * neg;
                }
            }
            return acc / static_cast<double>(n);
        }
    }
    return 0.0;
}

namespace {

struct TapeLoss {
    int loss_id;
    double value;
};

// Per-batch quantities that do not depend on the networks or the effective
// bound; computed once per epoch.
struct BatchAux {
    Mat const_terms;  // N x 1: discounted holding cost plus boundary penalty
    Eigen::VectorXd disc, disc_dt;
};

BatchAux make_batch_aux(const PathBatch& paths, const LossSpec& spec) {
    const int N = paths.N, K = paths.K;
    const double dt = paths.dt;
    BatchAux aux;
    aux.disc.resize(K);
    aux.disc_dt.resize(K);
    for (int k = 0; k < K; ++k) {
        aux.disc[k] = std::exp(-spec.gamma * k * dt);
        aux.disc_dt[k] = aux.disc[k] * dt;
    }
    aux.const_terms = Mat::Zero(N, 1);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) {
            const Eigen::Index r = static_cast<Eigen::Index>(k) * N + n;
            aux.const_terms(n, 0) +=
                aux.disc_dt[k] * holding_cost(*spec.h, paths.states.row(r).transpose()) +
                aux.disc[k] * spec.pi_hat.dot(paths.dY.row(r));
        }
    return aux;
}

TapeLoss build_loss(Tape& tape, const PathBatch& paths, const MlpVars& v_vars,
                    const MlpVars& g_vars, const LossSpec& spec, ShapeKind shape,
                    double shape_weight, const BatchAux& aux) {
    const int N = paths.N, d = paths.d;
    const Eigen::VectorXd& disc = aux.disc;
    const Eigen::VectorXd& disc_dt = aux.disc_dt;
    const Mat& const_terms = aux.const_terms;

    const int s_id = tape.constant(paths.states);
    const int db_id = tape.constant(paths.dB);

    // Gradient net over all step states; JVPs when the chain penalty needs them.
    std::vector<Eigen::VectorXd> dirs;
    if (shape == ShapeKind::tandem_chain)
        for (int i = 0; i + 1 < d; ++i) dirs.push_back(VectorXd::Unit(d, i));
    const ForwardWithJvps gfwd = mlp_forward_with_jvps(tape, g_vars, s_id, dirs);
    const int u_id = gfwd.output;

    const int ug = tape.matmul(u_id, tape.constant(spec.G));
    const int ybar = tape.add_rowvec(ug, tape.constant(spec.c.transpose()));
    const int gsum = tape.scale(tape.rowsum(tape.min_zero(ybar)), spec.b);
    const int drift_dot = tape.matmul(ug, tape.constant(spec.theta_tilde));
    const int g_vals = tape.sub(gsum, drift_dot);

    const int mart = tape.rowsum(tape.hadamard(u_id, db_id));
    const int M_n = tape.fold_steps(mart, disc, N);
    const int G_n = tape.fold_steps(g_vals, disc_dt, N);

    const int v0 = mlp_forward(tape, v_vars, tape.constant(paths.W0));
    const int vT = tape.scale(mlp_forward(tape, v_vars, tape.constant(paths.WT)),
                              std::exp(-spec.gamma * paths.T));

    int delta = tape.sub(tape.sub(vT, v0), M_n);
    delta = tape.add(delta, G_n);
    delta = tape.add(delta, tape.constant(const_terms));
    int loss = tape.mean_all(tape.square(delta));

    if (shape != ShapeKind::none && shape_weight > 0.0) {
        int pen = -1;
        if (shape == ShapeKind::crisscross) {
            Mat m1(paths.states.rows(), 1), m2(paths.states.rows(), 1);
            for (Eigen::Index r = 0; r < paths.states.rows(); ++r) {
                const bool lower = 2.0 * paths.states(r, 0) > paths.states(r, 1);
                m1(r, 0) = lower ? 1.0 : 0.0;
                m2(r, 0) = lower ? 0.0 : 1.0;
            }
            const int g1 = tape.matmul(u_id, tape.constant(VectorXd::Unit(d, 0)));
            const int g2 = tape.matmul(u_id, tape.constant(VectorXd::Unit(d, 1)));
            const int mix = tape.add(tape.hadamard(tape.min_zero(g1), tape.constant(m1)),
                                     tape.hadamard(tape.min_zero(g2), tape.constant(m2)));
            pen = tape.mean_all(tape.square(mix));
        } else if (shape == ShapeKind::threestation) {
            const int g1 = tape.matmul(u_id, tape.constant(VectorXd::Unit(d, 0)));
            const int g2 = tape.matmul(u_id, tape.constant(VectorXd::Unit(d, 1)));
            pen = tape.mean_all(tape.add(tape.square(tape.min_zero(g1)),
                                         tape.square(tape.min_zero(g2))));
        } else {  // tandem_chain
            for (std::size_t i = 0; i < gfwd.jvps.size(); ++i) {
                VectorXd sel = VectorXd::Zero(d);
                sel[static_cast<Eigen::Index>(i)] = 1.0;
                sel[static_cast<Eigen::Index>(i) + 1] = -1.0;
                const int diff = tape.matmul(gfwd.jvps[i], tape.constant(sel));
                const int term = tape.mean_all(tape.square(tape.min_zero(diff)));
                pen = (pen < 0) ? term : tape.add(pen, term);
            }
        }
        loss = tape.add(loss, tape.scale(pen, shape_weight));
    }
    return {loss, tape.val(loss)(0, 0)};
}

}  // namespace

LossGrads training_loss_gradients(const PathBatch& paths, const Mlp& v_net, const Mlp& g_net,
                                  const LossSpec& spec, ShapeKind shape, double shape_weight) {
    Tape tape;
    const MlpVars v_vars = bind_params(tape, v_net);
    const MlpVars g_vars = bind_params(tape, g_net);
    const BatchAux aux = make_batch_aux(paths, spec);
    const TapeLoss loss = build_loss(tape, paths, v_vars, g_vars, spec, shape, shape_weight, aux);
    tape.backward(loss.loss_id);

    LossGrads out;
    out.loss = loss.value;
    auto grab = [&](const std::vector<int>& ids, const std::vector<Mat>& like,
                    std::vector<Mat>& dst) {
        for (std::size_t l = 0; l < ids.size(); ++l) {
            Mat& g = tape.grad(ids[l]);
            dst.push_back(g.size() ? g : Mat::Zero(like[l].rows(), like[l].cols()));
        }
    };
    grab(v_vars.W_ids, v_net.W, out.v_W);
    grab(v_vars.b_ids, v_net.b, out.v_b);
    grab(g_vars.W_ids, g_net.W, out.g_W);
    grab(g_vars.b_ids, g_net.b, out.g_b);
    return out;
}

TrainResult train(const ControlProblem& pr, const SolverConfig& cfg) {
    const int d = pr.d;
    const double b = cfg.b > 0.0 ? cfg.b : pr.b;

    TrainResult result;
    result.v_net = Mlp::create(d, cfg.neurons, cfg.hidden_layers, 1, cfg.seed * 7919 + 1);
    result.g_net = Mlp::create(d, cfg.neurons, cfg.hidden_layers, d, cfg.seed * 7919 + 2);
    result.loss_history.reserve(cfg.iterations);

    SolverConfig run_cfg = cfg;
    if (run_cfg.theta_tilde.size() == 0) run_cfg.theta_tilde = pr.theta_tilde;
    run_cfg.b = b;

    const long iters_per_epoch =
        std::max<long>(1, (cfg.iterations + cfg.epochs - 1) / std::max(1, cfg.epochs));

    Adam adam;
    std::vector<Mat*> params;
    for (auto& w : result.v_net.W) params.push_back(&w);
    for (auto& bm : result.v_net.b) params.push_back(&bm);
    for (auto& w : result.g_net.W) params.push_back(&w);
    for (auto& bm : result.g_net.b) params.push_back(&bm);

    Mat start;
    long it = 0;
    for (int epoch = 0; it < cfg.iterations; ++epoch) {
        const PathBatch batch = simulate_reference_batch(
            pr, run_cfg, cfg.seed, static_cast<uint64_t>(epoch) * cfg.batch,
            epoch == 0 ? nullptr : &start);
        start = batch.WT;  // next epoch continues from the terminal states

        LossSpec spec = LossSpec::from_problem(pr, b);
        spec.theta_tilde = run_cfg.theta_tilde;
        const BatchAux aux = make_batch_aux(batch, spec);

        for (long j = 0; j < iters_per_epoch && it < cfg.iterations; ++j, ++it) {
            Tape tape;
            tape.reserve(256);
            const MlpVars v_vars = bind_params(tape, result.v_net);
            const MlpVars g_vars = bind_params(tape, result.g_net);
            spec.b = cfg.bound_schedule.effective(b, it);

            const TapeLoss loss = build_loss(tape, batch, v_vars, g_vars, spec, cfg.shape,
                                             cfg.shape_weight, aux);
            if (!std::isfinite(loss.value))
                throw DivergedLoss("training loss is not finite at iteration " + std::to_string(it));
            result.loss_history.push_back(loss.value);

            tape.backward(loss.loss_id);

            std::vector<const Mat*> grads;
            std::vector<Mat> zero_store;
            zero_store.reserve(params.size());
            auto collect = [&](const MlpVars& vars, const Mlp& net) {
                for (std::size_t l = 0; l < vars.W_ids.size(); ++l) {
                    Mat& gw = tape.grad(vars.W_ids[l]);
                    if (gw.size() == 0) gw = Mat::Zero(net.W[l].rows(), net.W[l].cols());
                    grads.push_back(&gw);
                }
                for (std::size_t l = 0; l < vars.b_ids.size(); ++l) {
                    Mat& gb = tape.grad(vars.b_ids[l]);
                    if (gb.size() == 0) gb = Mat::Zero(1, net.b[l].cols());
                    grads.push_back(&gb);
                }
            };
            // Order must match `params`.
            collect(v_vars, result.v_net);
            collect(g_vars, result.g_net);

            adam.step(params, grads, cfg.lr_at(it));
        }
    }
    if (!result.v_net.finite() || !result.g_net.finite())
        throw DivergedLoss("network weights are not finite after training");
    return result;
}

}  // namespace sct::nn
