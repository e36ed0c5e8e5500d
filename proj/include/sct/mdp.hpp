#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sct/problems.hpp"

namespace sct {

/// Greedy action per enumerated state.
struct TabularPolicy {
    std::vector<uint8_t> action;
};

struct MdpResult {
    std::vector<double> value;
    TabularPolicy policy;
    std::vector<double> sup_diffs;  // successive sup-norm differences, per sweep
    int sweeps = 0;
};

/// Tandem queueing control: state (q1, q2) with per-buffer cap, actions are
/// serve/idle per server (bit 0: server 1, bit 1: server 2). Arrivals and the
/// station-1 completion are blocked at the cap (truncation).
struct TandemMdp {
    double lambda = 0.95;
    double m = 1.0;
    Eigen::Vector2d h{1.0, 2.0};
    double r = 0.01;
    int cap = 1000;

    double uniformization_rate() const { return lambda + 2.0 / m; }
    long num_states() const { return static_cast<long>(cap + 1) * (cap + 1); }
    long index(int q1, int q2) const { return static_cast<long>(q1) * (cap + 1) + q2; }
};

TandemMdp build_tandem_mdp(double lambda = 0.95, double m = 1.0,
                           Eigen::Vector2d h = Eigen::Vector2d(1.0, 2.0), double r = 0.01,
                           int cap = 1000);

/// Criss-cross control: state (q1, q2, q3); station-1 action in
/// {0: idle, 1: serve class 1, 2: serve class 2}; station 2 is non-idling.
struct CrissCrossMdp {
    double lambda1 = 1.0, lambda2 = 0.95;
    double m1 = 0.5, m2 = 0.5, m3 = 1.0;
    Eigen::Vector3d h{1.0, 1.0, 1.0};
    double r = 0.01;
    int cap = 300;

    double uniformization_rate() const {
        return lambda1 + lambda2 + std::max(1.0 / m1, 1.0 / m2) + 1.0 / m3;
    }
    long num_states() const {
        const long n = cap + 1;
        return n * n * n;
    }
    long index(int q1, int q2, int q3) const {
        const long n = cap + 1;
        return (static_cast<long>(q1) * n + q2) * n + q3;
    }
};

CrissCrossMdp build_crisscross_mdp(CrissCase holding_case, int cap = 300);

/// Small explicit CTMC control problem for oracles and sanity checks.
struct ExplicitMdp {
    struct Action {
        double cost_rate = 0.0;
        std::vector<std::pair<double, long>> transitions;  // (rate, next state)
    };
    std::vector<std::vector<Action>> states;
    double Lambda = 0.0;
    double r = 0.0;
};

/// Discounted uniformized value iteration (double-buffered Jacobi sweeps) with
/// per-step discount Lambda/(Lambda+r); stops when the successive sup-norm
/// difference drops below eps; greedy policy extracted from the final values.
MdpResult value_iteration(const TandemMdp& mdp, double eps = 0.1, int max_sweeps = 2000000);
MdpResult value_iteration(const CrissCrossMdp& mdp, double eps = 0.1, int max_sweeps = 2000000);
MdpResult value_iteration(const ExplicitMdp& mdp, double eps = 0.1, int max_sweeps = 2000000);

/// Compact binary value table (magic + count + little-endian doubles).
void save_values_binary(const std::string& path, const std::vector<double>& values);
std::vector<double> load_values_binary(const std::string& path);

/// CSV slice of a criss-cross policy on the q1 = fixed plane: q2,q3,action.
void export_crisscross_policy_slice(const std::string& path, const CrissCrossMdp& mdp,
                                    const TabularPolicy& policy, int q1_fixed, int q_max);
/// CSV of a tandem policy: q1,q2,action (bit 0: serve 1, bit 1: serve 2).
void export_tandem_policy_csv(const std::string& path, const TandemMdp& mdp,
                              const TabularPolicy& policy, int q_max);

}  // namespace sct
