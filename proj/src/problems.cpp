#include "sct/problems.hpp"

#include <cmath>

#include "sct/errors.hpp"

namespace sct {

HoldingCost HoldingCost::linear(VectorXd h) {
    HoldingCost out;
    out.kind = Kind::linear;
    out.h_lin = std::move(h);
    return out;
}

HoldingCost HoldingCost::workload_lp(VectorXd h_class, MatrixXd M) {
    HoldingCost out;
    out.kind = Kind::workload_lp;
    out.h_class = std::move(h_class);
    out.M = std::move(M);
    if (out.M.rows() != 2) throw DimensionMismatch("workload LP enumeration requires d = 2");
    if (out.M.cols() != out.h_class.size())
        throw DimensionMismatch("workload profile and class costs disagree");
    return out;
}

HoldingCost HoldingCost::piecewise(VectorXd upper, VectorXd lower) {
    HoldingCost out;
    out.kind = Kind::piecewise;
    out.upper_coef = std::move(upper);
    out.lower_coef = std::move(lower);
    // Branches must agree on the seam w2 = 2*w1; check at w = (1, 2).
    const double at_seam_up = out.upper_coef[0] + 2.0 * out.upper_coef[1];
    const double at_seam_lo = out.lower_coef[0] + 2.0 * out.lower_coef[1];
    if (std::abs(at_seam_up - at_seam_lo) > 1e-12)
        throw ConfigInvalid("piecewise holding cost discontinuous at the seam");
    return out;
}

HoldingCost HoldingCost::crisscross_closed_form(CrissCase c) {
    switch (c) {
        case CrissCase::IIA: return piecewise((VectorXd(2) << 0, 1).finished(),
                                              (VectorXd(2) << 2, 0).finished());
        case CrissCase::IIB: return piecewise((VectorXd(2) << -1, 1.5).finished(),
                                              (VectorXd(2) << 2, 0).finished());
        case CrissCase::IIC: return piecewise((VectorXd(2) << 0, 1).finished(),
                                              (VectorXd(2) << 3, -0.5).finished());
        case CrissCase::IID: return piecewise((VectorXd(2) << -1, 1.5).finished(),
                                              (VectorXd(2) << 3, -0.5).finished());
    }
    throw UnknownCase("criss-cross case");
}

double holding_cost(const HoldingCost& h, const VectorXd& w) {
    switch (h.kind) {
        case HoldingCost::Kind::linear:
            return h.h_lin.dot(w);
        case HoldingCost::Kind::piecewise: {
            const VectorXd& coef = (w[1] >= 2.0 * w[0]) ? h.upper_coef : h.lower_coef;
            return coef.dot(w.head(2));
        }
        case HoldingCost::Kind::workload_lp: {
            // Exact basic-solution enumeration over column pairs (d = 2, k small).
            const auto k = h.M.cols();
            double best = std::numeric_limits<double>::infinity();
            bool feasible = false;
            constexpr double kTol = 1e-10;
            for (Eigen::Index i = 0; i < k; ++i) {
                for (Eigen::Index j = i + 1; j < k; ++j) {
                    Eigen::Matrix2d Bm;
                    Bm.col(0) = h.M.col(i);
                    Bm.col(1) = h.M.col(j);
                    const double det = Bm.determinant();
                    if (std::abs(det) < 1e-12) continue;
                    const Eigen::Vector2d zb = Bm.inverse() * w.head(2);
                    if (zb[0] < -kTol || zb[1] < -kTol) continue;
                    feasible = true;
                    best = std::min(best, h.h_class[i] * std::max(zb[0], 0.0) +
                                              h.h_class[j] * std::max(zb[1], 0.0));
                }
            }
            // Degenerate case: w on a single ray of the cone.
            for (Eigen::Index i = 0; i < k; ++i) {
                const double nrm2 = h.M.col(i).squaredNorm();
                if (nrm2 == 0.0) continue;
                const double alpha = h.M.col(i).dot(w.head(2)) / nrm2;
                if (alpha >= -kTol && (h.M.col(i) * alpha - w.head(2)).norm() <= kTol * (1.0 + w.norm())) {
                    feasible = true;
                    best = std::min(best, h.h_class[i] * std::max(alpha, 0.0));
                }
            }
            if (!feasible) throw InfeasibleWorkload("workload outside the cone {Mz : z >= 0}");
            return best;
        }
    }
    throw UnknownCase("holding cost kind");
}

Eigen::Vector3d zstar(const Eigen::Vector2d& w) {
    const double a = 2.0 * w[0] - w[1];
    return {std::max(a, 0.0), std::min(2.0 * w[0], w[1]), std::max(-a, 0.0)};
}

double BoundSchedule::effective(double b, long iteration) const {
    switch (kind) {
        case Kind::none: return b;
        case Kind::ramp: return std::min(b, p0 + static_cast<double>(iteration) / denom);
        case Kind::decay_bonus:
            return b + std::max(0.0, p0 - static_cast<double>(iteration) / denom);
    }
    return b;
}

MatrixXd ControlProblem::reflection_matrix() const {
    if (R_explicit) return *R_explicit;
    return G.leftCols(d);
}

VectorXd ControlProblem::pi_hat() const {
    if (pi) return *pi;
    return c.head(d);
}

bool ControlProblem::in_state_space(const VectorXd& w, double tol) const {
    if (space == StateSpace::orthant) return (w.array() >= -tol).all();
    return chart->contains(w.head<2>(), tol);
}

ControlProblem make_oned(double b) {
    ControlProblem pr;
    pr.name = "oned";
    pr.d = 1;
    pr.p = 2;
    pr.xi = VectorXd::Zero(1);
    pr.cov = MatrixXd::Identity(1, 1);
    pr.G = (MatrixXd(1, 2) << 1, -1).finished();
    pr.c = (VectorXd(2) << 0, 1).finished();
    pr.h = HoldingCost::linear((VectorXd(1) << 2).finished());
    pr.gamma = 0.1;
    pr.b = b;
    pr.theta_tilde = (VectorXd(2) << 0, 1).finished();  // net nominal drift -1
    pr.bound_schedule = {BoundSchedule::Kind::decay_bonus, 7.0, 4800.0};
    pr.nn_iterations = 6000;
    pr.nn_epochs = 135;
    pr.nn_neurons = 50;
    pr.lr_schedule = {{0, 5e-4}, {9500, 3e-4}, {22000, 1e-4}};
    return pr;
}

ControlProblem make_parallel(int d, double b) {
    ControlProblem pr;
    pr.name = "parallel";
    pr.d = d;
    pr.p = 2 * d;
    pr.xi = VectorXd::Zero(d);
    pr.cov = MatrixXd::Identity(d, d);
    pr.G.resize(d, 2 * d);
    pr.G << MatrixXd::Identity(d, d), -MatrixXd::Identity(d, d);
    pr.c.resize(2 * d);
    pr.c << VectorXd::Zero(d), VectorXd::Ones(d);
    pr.h = HoldingCost::linear(VectorXd::Constant(d, 2.0));
    pr.gamma = 0.1;
    pr.b = b;
    pr.theta_tilde.resize(2 * d);
    pr.theta_tilde << VectorXd::Zero(d), VectorXd::Ones(d);  // net nominal drift -1 per coordinate
    pr.bound_schedule = {BoundSchedule::Kind::decay_bonus, 7.0, 4800.0};
    pr.nn_iterations = 6000;
    pr.nn_epochs = 135;
    pr.nn_neurons = d >= 16 ? 300 : 100;
    pr.lr_schedule = {{0, 5e-4}, {9500, 3e-4}, {22000, 1e-4}};
    return pr;
}

ControlProblem make_tandem() {
    ControlProblem pr;
    pr.name = "tandem";
    pr.d = 2;
    pr.p = 2;
    pr.xi = (VectorXd(2) << -1, 0).finished();
    pr.cov = (MatrixXd(2, 2) << 2, -1, -1, 2).finished();
    pr.G = (MatrixXd(2, 2) << 1, 0, -1, 1).finished();
    pr.c = VectorXd::Zero(2);
    pr.h = HoldingCost::linear((VectorXd(2) << 1, 2).finished());
    pr.gamma = 4.0;
    pr.b = 20.0;
    pr.theta_tilde = VectorXd::Zero(2);
    pr.n_scale = 400.0;
    pr.shape = ShapeKind::tandem_chain;
    pr.nn_iterations = 6000;
    pr.nn_epochs = 34;
    pr.nn_neurons = 50;
    return pr;
}

ControlProblem make_crisscross(CrissCase c) {
    ControlProblem pr;
    pr.name = "crisscross-" + to_string(c);
    pr.d = 2;
    pr.p = 2;
    pr.xi = (VectorXd(2) << -0.5, -1).finished();
    pr.cov = (MatrixXd(2, 2) << 1, 0.5, 0.5, 2).finished();
    pr.G = MatrixXd::Identity(2, 2);
    pr.c = VectorXd::Zero(2);
    pr.h = HoldingCost::crisscross_closed_form(c);
    pr.gamma = 4.0;
    pr.b = 20.0;
    pr.theta_tilde = (VectorXd(2) << 0.0, 0.5).finished();
    pr.n_scale = 400.0;
    pr.workload_M = (MatrixXd(2, 3) << 0.5, 0.5, 0, 0, 1, 1).finished();
    pr.shape = ShapeKind::crisscross;
    pr.bound_schedule = {BoundSchedule::Kind::ramp, 4.0, 80.0};
    pr.nn_iterations = 6000;
    pr.nn_epochs = 34;
    pr.nn_neurons = 50;
    return pr;
}

namespace {

VectorXd threestation_costs(int cost_case) {
    switch (cost_case) {
        case 1: return (VectorXd(3) << 2, 1, 1).finished();
        case 2: return (VectorXd(3) << 2, 1, 2).finished();
        case 3: return (VectorXd(3) << 1.65, 1, 2.25).finished();
        default: throw UnknownCase("three-station cost case must be 1, 2 or 3");
    }
}

WedgeChart threestation_chart() {
    const MatrixXd M = (MatrixXd(2, 8) << 2, 0, 2, 2, 0, 6, 4, 2,
                                          3, 3, 3, 4, 1, 6, 3, 3).finished();
    Eigen::Matrix2d assoc;  // column 1 of R at the vertical axis, column 2 at the oblique ray
    assoc << 1, 0, 0, 1;
    return WedgeChart::from_cone(M, assoc);
}

}  // namespace

ControlProblem make_threestation(int cost_case) {
    const VectorXd cc = threestation_costs(cost_case);
    ControlProblem pr;
    pr.name = "threestation-case" + std::to_string(cost_case);
    pr.d = 2;
    pr.p = 6;
    pr.xi = (VectorXd(2) << -5.0, -5.0).finished();
    pr.cov = (MatrixXd(2, 2) << 50, 54, 54, 69).finished();
    pr.G = (MatrixXd(2, 6) << 1, 0, 2, -1, -0.5, -1.5,
                              0, 1, 3, -1.5, -1, -1.5).finished();
    pr.c = (VectorXd(6) << 0, 0, 0, cc[0], cc[1], cc[2]).finished();
    pr.h = HoldingCost::linear((VectorXd(2) << 1, 1).finished());
    pr.gamma = 0.1;
    pr.space = StateSpace::wedge;
    pr.chart = threestation_chart();
    pr.b = 200.0;
    pr.theta_tilde = VectorXd::Zero(6);
    pr.workload_M = (MatrixXd(2, 8) << 2, 0, 2, 2, 0, 6, 4, 2,
                                       3, 3, 3, 4, 1, 6, 3, 3).finished();
    pr.shape = ShapeKind::threestation;
    pr.bound_schedule = {BoundSchedule::Kind::ramp, 40.0, 800.0};
    pr.nn_iterations = 6000;
    pr.nn_epochs = 40;
    pr.nn_neurons = 100;
    pr.lr_schedule = {{0, 5e-4}, {19000, 3e-4}, {44000, 1e-4}, {70000, 3e-5}};
    return pr;
}

ControlProblem make_threestation_reduced(int cost_case) {
    ControlProblem pr = make_threestation(cost_case);
    // Idle mode 3 is a positive combination of modes 1 and 2 at equal (zero)
    // cost; drop its column.
    MatrixXd G(2, 5);
    G << pr.G.col(0), pr.G.col(1), pr.G.col(3), pr.G.col(4), pr.G.col(5);
    VectorXd c(5);
    c << pr.c[0], pr.c[1], pr.c[3], pr.c[4], pr.c[5];
    pr.G = G;
    pr.c = c;
    pr.p = 5;
    pr.theta_tilde = VectorXd::Zero(5);
    return pr;
}

ControlProblem make_manyqueues(int d, VectorXd h) {
    if (h.size() != d) throw DimensionMismatch("holding cost length must equal d");
    ControlProblem pr;
    pr.name = "manyqueues" + std::to_string(d);
    pr.d = d;
    pr.p = d;
    pr.xi = VectorXd::Zero(d);
    pr.xi[0] = -1.0;
    pr.cov = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        pr.cov(i, i) = 2.0;
        if (i + 1 < d) {
            pr.cov(i, i + 1) = -1.0;
            pr.cov(i + 1, i) = -1.0;
        }
    }
    pr.G = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        pr.G(i, i) = 1.0;
        if (i + 1 < d) pr.G(i + 1, i) = -1.0;
    }
    pr.c = VectorXd::Zero(d);
    pr.h = HoldingCost::linear(std::move(h));
    pr.gamma = 4.0;
    pr.b = 20.0;
    pr.theta_tilde = VectorXd::Constant(d, 0.5);
    pr.n_scale = 400.0;
    pr.shape = ShapeKind::tandem_chain;
    pr.bound_schedule = {BoundSchedule::Kind::ramp, 4.0, 14400.0};
    pr.nn_iterations = 9000;
    pr.nn_epochs = 52;
    pr.nn_neurons = 100;
    pr.lr_schedule = {{0, 5e-4}, {3000, 3e-4}, {9000, 1e-4}, {100000, 5e-5}, {150000, 2e-5}};
    return pr;
}

ControlProblem make_manyqueues6() {
    return make_manyqueues(6, (VectorXd(6) << 3, 3.9, 2, 2.9, 1, 1.9).finished());
}

CrissCase parse_criss_case(const std::string& s) {
    if (s == "IIA" || s == "iia") return CrissCase::IIA;
    if (s == "IIB" || s == "iib") return CrissCase::IIB;
    if (s == "IIC" || s == "iic") return CrissCase::IIC;
    if (s == "IID" || s == "iid") return CrissCase::IID;
    throw UnknownCase("criss-cross case: " + s);
}

std::string to_string(CrissCase c) {
    switch (c) {
        case CrissCase::IIA: return "IIA";
        case CrissCase::IIB: return "IIB";
        case CrissCase::IIC: return "IIC";
        case CrissCase::IID: return "IID";
    }
    return "?";
}

ControlProblem make_example(const std::string& name, int int_param, const std::string& case_param) {
    if (name == "oned") return make_oned();
    if (name == "parallel") return make_parallel(int_param > 0 ? int_param : 30);
    if (name == "tandem") return make_tandem();
    if (name == "crisscross") return make_crisscross(parse_criss_case(case_param));
    if (name == "threestation")
        return make_threestation(int_param > 0 ? int_param : 1);
    if (name == "manyqueues") {
        if (int_param == 0 || int_param == 6) return make_manyqueues6();
        throw UnknownCase("manyqueues catalog holds the six-queue instance; pass h for other d");
    }
    throw UnknownCase("unknown example: " + name);
}

}  // namespace sct
