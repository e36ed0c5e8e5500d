#pragma once

#include <functional>
#include <optional>

#include "sct/problems.hpp"
#include "sct/queue_sim.hpp"
#include "sct/rng.hpp"

namespace sct {

struct DiffusionSimConfig {
    double dt = 1e-4;
    VectorXd unit_step;  // per dimension; empty -> 0.01 everywhere
    long reps = 10000;
    double horizon = 0.0;  // 0 -> chosen so exp(-gamma * horizon) <= 1e-6
    uint64_t seed = 1;
    int workers = 0;
    NormalMethod normal_method = NormalMethod::inverse_cdf;
    long max_pushes_per_step = 1000000;
};

/// Active control components at a state (one flag per column of G).
using RegionFn = std::function<void(const VectorXd& w, std::vector<bool>& active)>;

/// Caches a region classifier on a rectangular grid (nearest-node lookup);
/// points beyond the grid use the classifier directly.
RegionFn make_grid_cached_region(const RegionFn& fn, int p, double w1_max, double w2_max, int n1,
                                 int n2);

struct DiffusionRunResult {
    CostEstimate estimate;
    // Per-coordinate estimates, available for linear holding costs with
    // single-coordinate control columns (decomposable instances).
    std::optional<VectorXd> coord_mean;
    std::optional<VectorXd> coord_std_error;
};

/// Euler steps of the uncontrolled diffusion; after each increment the state
/// is pushed back into the state space with unit-step displacements along the
/// associated reflection columns, then unit-step controls are applied while
/// the policy region is active. Discounted running and control costs accrue
/// at left endpoints.
DiffusionRunResult simulate_policy_value(const ControlProblem& pr, const RegionFn& region,
                                         const DiffusionSimConfig& cfg);

/// Per-coordinate threshold policy for decomposable instances: the downward
/// column of coordinate i is active when w_i > threshold.
RegionFn threshold_region(const ControlProblem& pr, double threshold);

/// No control anywhere (boundary reflection only).
RegionFn no_control_region(int p);

}  // namespace sct
