#include "sct/queue_sim.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>

#include "sct/errors.hpp"
#include "sct/parallel.hpp"

namespace sct {

QueueModel make_mm1_model(double lambda, double m, double h, double r) {
    QueueModel q;
    q.k = 1;
    q.num_stations = 1;
    q.station = {0};
    q.next_class = {-1};
    q.lambda = Eigen::VectorXd::Constant(1, lambda);
    q.m = Eigen::VectorXd::Constant(1, m);
    q.h = Eigen::VectorXd::Constant(1, h);
    q.r = r;
    q.n_scale = 1.0;
    return q;
}

QueueModel make_tandem_queue_model() {
    QueueModel q;
    q.k = 2;
    q.num_stations = 2;
    q.station = {0, 1};
    q.next_class = {1, -1};
    q.lambda = (Eigen::VectorXd(2) << 0.95, 0.0).finished();
    q.m = Eigen::VectorXd::Ones(2);
    q.h = (Eigen::VectorXd(2) << 1.0, 2.0).finished();
    q.r = 0.01;
    q.n_scale = 400.0;
    return q;
}

QueueModel make_crisscross_queue_model(CrissCase c) {
    QueueModel q;
    q.k = 3;
    q.num_stations = 2;
    q.station = {0, 0, 1};
    q.next_class = {-1, 2, -1};
    q.lambda = (Eigen::VectorXd(3) << 1.0, 0.95, 0.0).finished();
    q.m = (Eigen::VectorXd(3) << 0.5, 0.5, 1.0).finished();
    const CrissCrossMdp tmp = build_crisscross_mdp(c, 1);
    q.h = tmp.h;
    q.r = 0.01;
    q.n_scale = 400.0;
    return q;
}

QueueModel make_chain_queue_model(int d, Eigen::VectorXd h) {
    if (h.size() != d) throw DimensionMismatch("holding cost length must equal d");
    QueueModel q;
    q.k = d;
    q.num_stations = d;
    q.station.resize(d);
    q.next_class.resize(d);
    for (int i = 0; i < d; ++i) {
        q.station[i] = i;
        q.next_class[i] = (i + 1 < d) ? i + 1 : -1;
    }
    q.lambda = Eigen::VectorXd::Zero(d);
    q.lambda[0] = 0.95;
    q.m = Eigen::VectorXd::Ones(d);
    q.h = std::move(h);
    q.r = 0.01;
    q.n_scale = 400.0;
    return q;
}

QueueModel make_chain6_queue_model() {
    return make_chain_queue_model(6, (Eigen::VectorXd(6) << 3, 3.9, 2, 2.9, 1, 1.9).finished());
}

namespace {

class NeverIdlePolicy final : public SchedulingPolicy {
public:
    void decide(const QueueModel& model, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        std::fill(serve.begin(), serve.end(), -1);
        for (int c = 0; c < model.k; ++c)
            if (q[c] > 0 && serve[model.station[c]] < 0) serve[model.station[c]] = c;
    }
    std::string name() const override { return "never-idle"; }
};

class StaticPriorityPolicy final : public SchedulingPolicy {
public:
    explicit StaticPriorityPolicy(std::vector<int> order) : order_(std::move(order)) {}
    void decide(const QueueModel& model, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        std::fill(serve.begin(), serve.end(), -1);
        for (int c : order_)
            if (q[c] > 0 && serve[model.station[c]] < 0) serve[model.station[c]] = c;
    }
    std::string name() const override { return "static-priority"; }

private:
    std::vector<int> order_;
};

class TandemMdpPolicy final : public SchedulingPolicy {
public:
    TandemMdpPolicy(TandemMdp mdp, TabularPolicy policy)
        : mdp_(std::move(mdp)), policy_(std::move(policy)) {}
    void decide(const QueueModel&, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        const int q1 = std::min(q[0], mdp_.cap), q2 = std::min(q[1], mdp_.cap);
        const uint8_t a = policy_.action[mdp_.index(q1, q2)];
        serve[0] = (a & 1) && q[0] > 0 ? 0 : -1;
        serve[1] = (a & 2) && q[1] > 0 ? 1 : -1;
    }
    std::string name() const override { return "mdp"; }

private:
    TandemMdp mdp_;
    TabularPolicy policy_;
};

class CrissCrossMdpPolicy final : public SchedulingPolicy {
public:
    CrissCrossMdpPolicy(CrissCrossMdp mdp, TabularPolicy policy)
        : mdp_(std::move(mdp)), policy_(std::move(policy)) {}
    void decide(const QueueModel&, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        const int q1 = std::min(q[0], mdp_.cap), q2 = std::min(q[1], mdp_.cap),
                  q3 = std::min(q[2], mdp_.cap);
        const uint8_t a = policy_.action[mdp_.index(q1, q2, q3)];
        serve[0] = (a == 1 && q[0] > 0) ? 0 : (a == 2 && q[1] > 0) ? 1 : -1;
        serve[1] = q[2] > 0 ? 2 : -1;  // station 2 is non-idling
    }
    std::string name() const override { return "mdp"; }

private:
    CrissCrossMdp mdp_;
    TabularPolicy policy_;
};

class DiffusionTandemPolicy final : public SchedulingPolicy {
public:
    DiffusionTandemPolicy(GradientFn g, double n, int cache_max)
        : g_(std::move(g)), n_(n), cache_max_(cache_max) {
        idle_.resize(static_cast<std::size_t>(cache_max_ + 1) * (cache_max_ + 1));
        const double rn = std::sqrt(n_);
        for (int q1 = 0; q1 <= cache_max_; ++q1)
            for (int q2 = 0; q2 <= cache_max_; ++q2) {
                const Eigen::VectorXd grad =
                    g_((Eigen::VectorXd(2) << q1 / rn, q2 / rn).finished());
                idle_[static_cast<std::size_t>(q1) * (cache_max_ + 1) + q2] =
                    grad[0] <= grad[1];
            }
    }
    void decide(const QueueModel&, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        bool idle1;
        if (q[0] <= cache_max_ && q[1] <= cache_max_)
            idle1 = q[0] == 0 || idle_[static_cast<std::size_t>(q[0]) * (cache_max_ + 1) + q[1]];
        else
            idle1 = action_tandem_idle(q, g_, n_);
        serve[0] = idle1 ? -1 : 0;
        serve[1] = q[1] > 0 ? 1 : -1;
    }
    std::string name() const override { return "diffusion"; }

private:
    GradientFn g_;
    double n_;
    int cache_max_;
    std::vector<char> idle_;
};

class DiffusionChainPolicy final : public SchedulingPolicy {
public:
    DiffusionChainPolicy(GradientFn g, double n) : g_(std::move(g)), n_(n) {}
    void decide(const QueueModel& model, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        const int d = model.k;
        const Eigen::VectorXd grad = g_(q.cast<double>() / std::sqrt(n_));
        for (int i = 0; i < d - 1; ++i)
            serve[i] = (q[i] == 0 || grad[i] <= grad[i + 1]) ? -1 : i;
        serve[d - 1] = q[d - 1] > 0 ? d - 1 : -1;
    }
    std::string name() const override { return "diffusion"; }

private:
    GradientFn g_;
    double n_;
};

class DiffusionCrissCrossPolicy final : public SchedulingPolicy {
public:
    DiffusionCrissCrossPolicy(GradientFn g, double n, int s, int cache_max)
        : g_(std::move(g)), n_(n), s_(s), cache_max_(cache_max) {
        M_ = (MatrixXd(2, 3) << 0.5, 0.5, 0, 0, 1, 1).finished();
        // Signs of G1, G2 depend on q only through (q1+q2, q2+q3).
        const double rn = std::sqrt(n_);
        sign1_.resize(static_cast<std::size_t>(cache_max_ + 1) * (cache_max_ + 1));
        sign2_.resize(sign1_.size());
        for (int a = 0; a <= cache_max_; ++a)
            for (int b = 0; b <= cache_max_; ++b) {
                const Eigen::VectorXd grad =
                    g_((Eigen::VectorXd(2) << 0.5 * a / rn, static_cast<double>(b) / rn).finished());
                sign1_[idx(a, b)] = grad[0] < 0.0;
                sign2_[idx(a, b)] = grad[1] < 0.0;
            }
    }
    void decide(const QueueModel&, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        const int a = q[0] + q[1], b = q[1] + q[2];
        bool g1_neg, g2_neg;
        if (a <= cache_max_ && b <= cache_max_) {
            g1_neg = sign1_[idx(a, b)];
            g2_neg = sign2_[idx(a, b)];
        } else {
            const Eigen::Vector2d w = M_ * q.cast<double>() / std::sqrt(n_);
            const Eigen::VectorXd grad = g_(w);
            g1_neg = grad[0] < 0.0;
            g2_neg = grad[1] < 0.0;
        }
        if (q[0] == 0 && g1_neg) {
            serve[0] = -1;  // idle server 1
        } else if (q[2] > s_ || g2_neg) {
            serve[0] = q[0] > 0 ? 0 : (q[1] > 0 ? 1 : -1);  // priority to class 1
        } else {
            serve[0] = q[1] > 0 ? 1 : (q[0] > 0 ? 0 : -1);  // priority to class 2
        }
        serve[1] = q[2] > 0 ? 2 : -1;
    }
    std::string name() const override { return "diffusion"; }

private:
    std::size_t idx(int a, int b) const {
        return static_cast<std::size_t>(a) * (cache_max_ + 1) + b;
    }
    GradientFn g_;
    double n_;
    int s_;
    int cache_max_;
    MatrixXd M_;
    std::vector<char> sign1_, sign2_;
};

class LinearBoundaryPolicy final : public SchedulingPolicy {
public:
    LinearBoundaryPolicy(Eigen::VectorXd beta, double n) : beta_(std::move(beta)), n_(n) {}
    void decide(const QueueModel& model, const Eigen::VectorXi& q,
                std::vector<int>& serve) const override {
        const int d = model.k;
        const Eigen::VectorXd W = q.cast<double>() / std::sqrt(n_);
        for (int i = 0; i < d; ++i) {
            if (q[i] == 0) {
                serve[i] = -1;
            } else if (i % 2 == 0 && i + 1 < d && lbp_idle(i + 1, W, beta_)) {
                serve[i] = -1;  // odd station (1-based) idled by the linear rule
            } else {
                serve[i] = i;
            }
        }
    }
    std::string name() const override { return "lbp"; }

private:
    Eigen::VectorXd beta_;
    double n_;
};

}  // namespace

std::unique_ptr<SchedulingPolicy> never_idle_policy() { return std::make_unique<NeverIdlePolicy>(); }

std::unique_ptr<SchedulingPolicy> static_priority_policy(std::vector<int> order) {
    return std::make_unique<StaticPriorityPolicy>(std::move(order));
}

std::unique_ptr<SchedulingPolicy> tandem_mdp_policy(TandemMdp mdp, TabularPolicy policy) {
    return std::make_unique<TandemMdpPolicy>(std::move(mdp), std::move(policy));
}

std::unique_ptr<SchedulingPolicy> crisscross_mdp_policy(CrissCrossMdp mdp, TabularPolicy policy) {
    return std::make_unique<CrissCrossMdpPolicy>(std::move(mdp), std::move(policy));
}

std::unique_ptr<SchedulingPolicy> diffusion_tandem_policy(GradientFn g, double n, int cache_max) {
    return std::make_unique<DiffusionTandemPolicy>(std::move(g), n, cache_max);
}

std::unique_ptr<SchedulingPolicy> diffusion_chain_policy(GradientFn g, double n) {
    return std::make_unique<DiffusionChainPolicy>(std::move(g), n);
}

std::unique_ptr<SchedulingPolicy> diffusion_crisscross_policy(GradientFn g, double n, int s,
                                                              int cache_max) {
    return std::make_unique<DiffusionCrissCrossPolicy>(std::move(g), n, s, cache_max);
}

std::unique_ptr<SchedulingPolicy> linear_boundary_policy(Eigen::VectorXd beta, double n) {
    return std::make_unique<LinearBoundaryPolicy>(std::move(beta), n);
}

bool action_tandem_idle(const Eigen::VectorXi& q, const GradientFn& g, double n) {
    if (q[0] == 0) return true;
    const Eigen::VectorXd grad = g(q.cast<double>().head(2) / std::sqrt(n));
    return grad[0] <= grad[1];
}

bool action_chain_idle(const Eigen::VectorXi& q, const GradientFn& g, double n, int i) {
    if (q[i] == 0) return true;
    const Eigen::VectorXd grad = g(q.cast<double>() / std::sqrt(n));
    return grad[i] <= grad[i + 1];
}

CrissAction action_crisscross(const Eigen::VectorXi& q, const GradientFn& g, double n, int s,
                              const MatrixXd& M) {
    const Eigen::Vector2d w = M * q.cast<double>() / std::sqrt(n);
    const Eigen::VectorXd grad = g(w);
    if (q[0] == 0 && grad[0] < 0.0) return CrissAction::idle_server1;
    if (q[2] > s || grad[1] < 0.0) return CrissAction::priority_class1;
    return CrissAction::priority_class2;
}

bool lbp_idle(int i, const Eigen::VectorXd& W, const Eigen::VectorXd& beta) {
    if (i % 2 == 0) throw ConfigInvalid("the linear boundary rule applies to odd stations");
    const int idx = i - 1;  // 0-based
    if (W[idx] == 0.0) return true;
    return beta[idx] * W[idx] + 1.0 <= beta[idx + 1] * W[idx + 1];
}

namespace {

double simulate_one_rep(const QueueModel& model, const SchedulingPolicy& policy, double horizon,
                        uint64_t seed, uint64_t rep) {
    CounterRng rng(seed, rep);
    Eigen::VectorXi q = Eigen::VectorXi::Zero(model.k);
    std::vector<int> serve(model.num_stations, -1);
    std::vector<double> rates;
    std::vector<int> events;  // >= 0: arrival of class; < 0: completion of class -(e+1)
    rates.reserve(2 * model.k);
    events.reserve(2 * model.k);

    double t = 0.0;
    double cost = 0.0;
    const double r = model.r;

    while (t < horizon) {
        policy.decide(model, q, serve);

        rates.clear();
        events.clear();
        double total = 0.0;
        for (int c = 0; c < model.k; ++c) {
            if (model.lambda[c] > 0.0) {
                rates.push_back(model.lambda[c]);
                events.push_back(c);
                total += model.lambda[c];
            }
        }
        for (int st = 0; st < model.num_stations; ++st) {
            const int c = serve[st];
            if (c >= 0) {
                assert(q[c] > 0 && "policy must not serve an empty buffer");
                const double mu = 1.0 / model.m[c];
                rates.push_back(mu);
                events.push_back(-(c + 1));
                total += mu;
            }
        }

        const double hq = model.h.dot(q.cast<double>());
        if (total <= 0.0) {
            cost += hq * (std::exp(-r * t) - std::exp(-r * horizon)) / r;
            break;
        }
        const double dt = rng.exponential(total);
        const double t_next = std::min(t + dt, horizon);
        cost += hq * (std::exp(-r * t) - std::exp(-r * t_next)) / r;
        t = t_next;
        if (t >= horizon) break;

        double pick = rng.uniform() * total;
        std::size_t e = 0;
        for (; e + 1 < rates.size(); ++e) {
            pick -= rates[e];
            if (pick <= 0.0) break;
        }
        const int ev = events[e];
        if (ev >= 0) {
            q[ev] += 1;
        } else {
            const int c = -ev - 1;
            q[c] -= 1;
            if (model.next_class[c] >= 0) q[model.next_class[c]] += 1;
        }
    }
    return cost;
}

}  // namespace

CostEstimate simulate_discounted(const QueueModel& model, const SchedulingPolicy& policy,
                                 double horizon, long reps, uint64_t seed, int workers) {
    if (!(horizon * model.r >= 14.0 - 1e-9))
        throw ConfigInvalid("horizon too short: require horizon * r >= 14");
    std::vector<double> costs(reps);
    const int nthreads = effective_workers(workers);
#pragma omp parallel for schedule(dynamic, 64) num_threads(nthreads)
    for (long rep = 0; rep < reps; ++rep)
        costs[rep] = simulate_one_rep(model, policy, horizon, seed, static_cast<uint64_t>(rep));

    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    var /= std::max<long>(1, reps - 1);

    CostEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(var / static_cast<double>(reps));
    est.replications = reps;
    est.horizon = horizon;
    return est;
}

LbpSearchResult lbp_grid_search(const QueueModel& model, double horizon, long reps, uint64_t seed,
                                int workers, std::vector<double> odd_range,
                                std::vector<double> even_range) {
    const int d = model.k;
    if (d % 2 != 0) throw ConfigInvalid("linear boundary search requires an even class count");
    if (odd_range.empty())
        for (int i = 0; i <= 10; ++i) odd_range.push_back(0.1 * i);
    if (even_range.empty())
        for (int i = 4; i <= 36; ++i) even_range.push_back(0.1 * i);

    LbpSearchResult result;
    result.beta = Eigen::VectorXd::Zero(d);

    for (int pair = 0; pair + 1 < d; pair += 2) {
        LbpStage stage;
        stage.pair_first = pair;
        double best = std::numeric_limits<double>::infinity();
        double best_odd = 0.0, best_even = 0.0;
        for (double bo : odd_range) {
            for (double be : even_range) {
                Eigen::VectorXd beta = result.beta;
                beta[pair] = bo;
                beta[pair + 1] = be;
                // Downstream pairs stay (0, 0): those stations run non-idling.
                const auto policy = linear_boundary_policy(beta, model.n_scale);
                // Common random numbers: the same seed (hence the same
                // replication streams) across all candidates in a stage.
                const CostEstimate est =
                    simulate_discounted(model, *policy, horizon, reps, seed, workers);
                ++stage.candidates;
                if (est.mean < best) {
                    best = est.mean;
                    best_odd = bo;
                    best_even = be;
                }
            }
        }
        result.beta[pair] = best_odd;
        result.beta[pair + 1] = best_even;
        stage.best_cost = best;
        result.stages.push_back(stage);
    }
    return result;
}

void export_decision_lattice_csv(const std::string& path, const QueueModel& model,
                                 const SchedulingPolicy& policy, int q_max, int q3_fixed) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ArtifactMissing("cannot open lattice output: " + path);
    std::fprintf(f, "q1,q2,station1_class,station2_class\n");
    Eigen::VectorXi q = Eigen::VectorXi::Zero(model.k);
    std::vector<int> serve(model.num_stations, -1);
    for (int q1 = 0; q1 <= q_max; ++q1)
        for (int q2 = 0; q2 <= q_max; ++q2) {
            q[0] = q1;
            q[1] = q2;
            if (model.k >= 3) q[2] = q3_fixed;
            policy.decide(model, q, serve);
            std::fprintf(f, "%d,%d,%d,%d\n", q1, q2, serve[0],
                         model.num_stations > 1 ? serve[1] : -1);
        }
    std::fclose(f);
}

}  // namespace sct
