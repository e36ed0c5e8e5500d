#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sct/problems.hpp"

namespace sct {

/// Anisotropic grid over the (possibly wedge-shaped) truncated state space:
/// nodes (i*h1, j*h2), i = 0..n1, j = 0..n2.
struct McaGrid {
    double h1 = 0.1;
    double h2 = 0.1;
    int n1 = 400;
    int n2 = 400;
};

/// Locally consistent controlled chain: one shared interior stencil (the drift
/// and covariance are constant), boundary rays resolved by pushing along the
/// associated reflection columns, and instantaneous control jumps with
/// bilinear interpolation at off-grid targets.
struct McaProblem {
    McaGrid grid;
    double gamma = 0.0;
    double dt = 0.0;        // interpolation interval 1/Q_h
    double wedge_slope = 0.0;  // state space: w2 >= slope * w1  (0 for the orthant)

    struct StencilEntry {
        int di, dj;
        double p;
    };
    std::vector<StencilEntry> stencil;

    struct Jump {
        Eigen::Vector2d delta;  // displacement in w coordinates
        double cost;            // c_j * step
        int control_index;      // column of G
        bool zero_cost;         // idle/reflection column, excluded from the Bellman min
    };
    std::vector<Jump> jumps;

    std::vector<long> node_to_state;            // -1 outside the wedge
    std::vector<std::pair<int, int>> state_to_node;
    std::vector<double> cost_rate;              // h(w) per state
    std::vector<int32_t> neighbors;             // states x stencil.size()
    struct InterpTarget {
        int32_t state[4];
        double weight[4];
    };
    std::vector<InterpTarget> jump_targets;     // states x jumps.size()

    long num_states() const { return static_cast<long>(state_to_node.size()); }
    long state_at(int i, int j) const { return node_to_state[static_cast<long>(i) * (grid.n2 + 1) + j]; }
    Eigen::Vector2d coords(long s) const {
        return {state_to_node[s].first * grid.h1, state_to_node[s].second * grid.h2};
    }
};

/// Builds the chain for a 2-D instance. Throws InvalidProbabilities when the
/// grid ratio puts a locally consistent transition probability outside [0,1].
McaProblem build_mca(const ControlProblem& pr, const McaGrid& grid);

struct McaSolution {
    std::vector<double> value;
    /// active[s*jumps + j]: jump j strictly improves on continuation at s.
    std::vector<uint8_t> active;
    int iterations = 0;

    bool is_active(const McaProblem& mca, long s, std::size_t j) const {
        return active[s * mca.jumps.size() + j] != 0;
    }
};

enum class McaMethod { policy_iteration, value_iteration };

/// Value iteration over min(continuation, jump + cost); policy_iteration runs
/// Howard steps with sparse LU policy evaluation and is the default for
/// production grids. Monotone from the zero initialization under value_iteration.
McaSolution mca_solve(const McaProblem& mca, double eps = 1e-8,
                      McaMethod method = McaMethod::policy_iteration, int max_iter = 0);

/// Region labels in the heatmap CSV schema (w1,w2,control_index,active).
void export_mca_labels_csv(const std::string& path, const McaProblem& mca,
                           const McaSolution& sol);

}  // namespace sct
