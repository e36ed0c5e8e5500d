#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sct/linalg.hpp"
#include "sct/reflection.hpp"

namespace sct {

enum class CrissCase { IIA, IIB, IIC, IID };
enum class StateSpace { orthant, wedge };

/// Holding cost over the state space. The LP variant evaluates
/// min{h_class . z : M z = w, z >= 0} exactly by enumerating 2x2 bases; the
/// piecewise variant holds the closed-form two-branch criss-cross costs.
struct HoldingCost {
    enum class Kind { linear, workload_lp, piecewise };
    Kind kind = Kind::linear;

    VectorXd h_lin;      // linear: h . w
    VectorXd h_class;    // workload_lp
    MatrixXd M;          // workload_lp: d x k profile matrix
    VectorXd upper_coef; // piecewise: branch where w2 >= 2*w1
    VectorXd lower_coef; // piecewise: branch where w2 <  2*w1

    static HoldingCost linear(VectorXd h);
    static HoldingCost workload_lp(VectorXd h_class, MatrixXd M);
    static HoldingCost piecewise(VectorXd upper, VectorXd lower);
    static HoldingCost crisscross_closed_form(CrissCase c);
};

/// Evaluates the holding cost at w. Throws InfeasibleWorkload when the LP
/// variant finds no feasible basis (w outside the cone {Mz : z >= 0}).
double holding_cost(const HoldingCost& h, const VectorXd& w);

/// Criss-cross optimal queue-length split: ((2w1-w2)^+, 2w1 ^ w2, (w2-2w1)^+).
Eigen::Vector3d zstar(const Eigen::Vector2d& w);

/// Effective-bound schedule applied to the Hamiltonian bound during training.
/// ramp:       b_eff(it) = min(b, p0 + it/denom)
/// decay_bonus: b_eff(it) = b + max(0, p0 - it/denom)
struct BoundSchedule {
    enum class Kind { none, ramp, decay_bonus };
    Kind kind = Kind::none;
    double p0 = 0.0;
    double denom = 1.0;

    double effective(double b, long iteration) const;
};

enum class ShapeKind { none, crisscross, threestation, tandem_chain };

/// Full datum of a singular/drift control instance.
struct ControlProblem {
    std::string name;
    int d = 0;
    int p = 0;
    VectorXd xi;
    MatrixXd cov;  // A, d x d
    MatrixXd G;    // d x p control directions
    VectorXd c;    // p control cost rates
    std::optional<VectorXd> pi;  // boundary penalty rates (formulation with exogenous reflection)
    HoldingCost h;
    double gamma = 0.0;
    StateSpace space = StateSpace::orthant;
    std::optional<WedgeChart> chart;
    double b = 0.0;           // drift bound
    VectorXd theta_tilde;     // nominal drift, p entries in [0,b]
    double n_scale = 1.0;     // heavy-traffic sequence index n
    std::optional<MatrixXd> workload_M;  // queue-length to workload map

    // Training defaults carried with the instance.
    BoundSchedule bound_schedule;
    ShapeKind shape = ShapeKind::none;
    int nn_iterations = 6000;
    int nn_epochs = 34;
    int nn_neurons = 50;
    std::vector<std::pair<long, double>> lr_schedule{{0, 5e-4}, {3000, 3e-4}, {9000, 1e-4}};

    /// Reflection matrix: explicit pi-formulation matrix if set, else the first
    /// d columns of G.
    MatrixXd reflection_matrix() const;
    std::optional<MatrixXd> R_explicit;

    double holding(const VectorXd& w) const { return holding_cost(h, w); }
    /// Penalty rates entering the residual: pi when given, else first d entries of c.
    VectorXd pi_hat() const;
    bool in_state_space(const VectorXd& w, double tol = 1e-9) const;
};

// Catalog of the worked examples.
ControlProblem make_oned(double b = 10.0);
ControlProblem make_parallel(int d, double b = 10.0);
ControlProblem make_tandem();
ControlProblem make_crisscross(CrissCase c);
/// Paper datum with all six control modes; cost case in {1, 2, 3}.
ControlProblem make_threestation(int cost_case);
/// Redundant idle mode for station 3 removed (U3 == 0); five control columns.
ControlProblem make_threestation_reduced(int cost_case);
ControlProblem make_manyqueues(int d, VectorXd h);
/// Default six-queue instance, h = (3, 3.9, 2, 2.9, 1, 1.9).
ControlProblem make_manyqueues6();

/// Dispatcher for config files: name in {oned, parallel, tandem, crisscross,
/// threestation, manyqueues}. Throws UnknownCase.
ControlProblem make_example(const std::string& name, int int_param = 0,
                            const std::string& case_param = "");

CrissCase parse_criss_case(const std::string& s);
std::string to_string(CrissCase c);

}  // namespace sct
