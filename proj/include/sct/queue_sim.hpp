#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sct/mdp.hpp"
#include "sct/problems.hpp"
#include "sct/rng.hpp"

namespace sct {

/// Multiclass Markovian queueing network; class routing is a single successor.
struct QueueModel {
    int k = 0;                    // classes
    int num_stations = 0;
    std::vector<int> station;     // class -> station
    std::vector<int> next_class;  // -1 exit
    Eigen::VectorXd lambda;       // external arrival rate per class
    Eigen::VectorXd m;            // mean service time per class
    Eigen::VectorXd h;            // holding rate per class
    double r = 0.01;
    double n_scale = 400.0;       // heavy-traffic sequence index n
};

QueueModel make_mm1_model(double lambda = 0.5, double m = 1.0, double h = 1.0, double r = 0.01);
QueueModel make_tandem_queue_model();
QueueModel make_crisscross_queue_model(CrissCase c);
QueueModel make_chain_queue_model(int d, Eigen::VectorXd h);
QueueModel make_chain6_queue_model();

/// Monte-Carlo discounted-cost estimate.
struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long replications = 0;
    double horizon = 0.0;
};

/// Scheduling decision: for each station, the class to serve (-1 idles).
class SchedulingPolicy {
public:
    virtual ~SchedulingPolicy() = default;
    virtual void decide(const QueueModel& model, const Eigen::VectorXi& q,
                        std::vector<int>& serve_class) const = 0;
    virtual std::string name() const = 0;
};

using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Serve whenever any class at the station is non-empty (lowest index first).
std::unique_ptr<SchedulingPolicy> never_idle_policy();
/// Serve the first non-empty class in `order` at each station.
std::unique_ptr<SchedulingPolicy> static_priority_policy(std::vector<int> order);
std::unique_ptr<SchedulingPolicy> tandem_mdp_policy(TandemMdp mdp, TabularPolicy policy);
std::unique_ptr<SchedulingPolicy> crisscross_mdp_policy(CrissCrossMdp mdp, TabularPolicy policy);
/// Server 1 idles iff q1 = 0 or G1(q/sqrt(n)) <= G2(q/sqrt(n)); decisions are
/// cached on the integer lattice up to `cache_max` per axis.
std::unique_ptr<SchedulingPolicy> diffusion_tandem_policy(GradientFn g, double n,
                                                          int cache_max = 512);
std::unique_ptr<SchedulingPolicy> diffusion_chain_policy(GradientFn g, double n);
/// Workload w = M q / sqrt(n); branch structure of the translated rule with
/// safety stock s.
std::unique_ptr<SchedulingPolicy> diffusion_crisscross_policy(GradientFn g, double n, int s,
                                                              int cache_max = 1024);
std::unique_ptr<SchedulingPolicy> linear_boundary_policy(Eigen::VectorXd beta, double n);

// Translated per-state actions (the policies above delegate to these).
bool action_tandem_idle(const Eigen::VectorXi& q, const GradientFn& g, double n);
bool action_chain_idle(const Eigen::VectorXi& q, const GradientFn& g, double n, int i);
enum class CrissAction { idle_server1, priority_class1, priority_class2 };
CrissAction action_crisscross(const Eigen::VectorXi& q, const GradientFn& g, double n, int s,
                              const MatrixXd& M);
/// Linear boundary rule for odd station i (1-based): idle iff the buffer is
/// empty or beta_i W_i + 1 <= beta_{i+1} W_{i+1}.
bool lbp_idle(int i, const Eigen::VectorXd& W, const Eigen::VectorXd& beta);

/// Event-driven simulation with preemptive-resume service and exponential
/// races re-sampled at every transition; discounted holding cost accumulated
/// in closed form between events. Bitwise reproducible for a fixed seed.
CostEstimate simulate_discounted(const QueueModel& model, const SchedulingPolicy& policy,
                                 double horizon, long reps, uint64_t seed, int workers = 0);

/// Three-stage grid search over linear-boundary parameters with common random
/// numbers within each stage.
struct LbpStage {
    int pair_first = 0;  // 0-based index of the odd-station beta searched
    long candidates = 0;
    double best_cost = 0.0;
};
struct LbpSearchResult {
    Eigen::VectorXd beta;
    std::vector<LbpStage> stages;
};
LbpSearchResult lbp_grid_search(const QueueModel& model, double horizon, long reps,
                                uint64_t seed, int workers = 0,
                                std::vector<double> odd_range = {},
                                std::vector<double> even_range = {});

/// Decision lattice (q1, q2, serve flags / action index) for two-class models,
/// or a fixed-q3 slice for three-class models.
void export_decision_lattice_csv(const std::string& path, const QueueModel& model,
                                 const SchedulingPolicy& policy, int q_max, int q3_fixed = 0);

}  // namespace sct
