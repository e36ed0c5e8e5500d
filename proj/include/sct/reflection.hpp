#pragma once

#include <functional>
#include <optional>

#include "sct/linalg.hpp"

namespace sct {

/// One discrete Skorokhod step: w_next = w + dx + R*dy with dy >= 0 minimal.
struct ReflectionStepResult {
    VectorXd w_next;
    VectorXd dy;
};

/// Least non-negative dy with w + dx + R*dy >= 0, via the fixed point
/// dy <- max(0, Q*dy - (w + dx)), which contracts because rho(Q) < 1.
/// Throws NonConvergence after the iteration cap.
ReflectionStepResult reflect_step(const VectorXd& w, const VectorXd& dx, const MMatrix& R);

/// Discretized trajectory of a reflected path: states at step edges, per-step
/// boundary pushes, and the Brownian increments retained for loss assembly.
struct ReflectedPath {
    MatrixXd W;   // (num_steps+1) x d
    MatrixXd dY;  // num_steps x d
    MatrixXd dB;  // num_steps x d (zero-sized when not retained)

    VectorXd y_total() const { return dY.colwise().sum(); }
};

/// Linear chart for a two-dimensional cone S = {w = Uz, z >= 0}: rows of B are
/// inward normals of the boundary rays, scaled so B * assoc_col has unit diagonal.
/// Column k of assoc_cols is the reflection direction associated with ray k.
struct WedgeChart {
    Eigen::Matrix2d B;
    Eigen::Matrix2d B_inv;
    Eigen::Matrix2d assoc_cols;  // original-coordinate reflection columns, one per ray
    Eigen::Matrix2d ray_dirs;    // boundary ray directions (columns)

    /// Chart coordinates z = B*w; throws OutsideWedge if any component < -tol.
    Eigen::Vector2d to_orthant(const Eigen::Vector2d& w, double tol = 1e-9) const;
    Eigen::Vector2d from_orthant(const Eigen::Vector2d& z) const { return B_inv * z; }
    bool contains(const Eigen::Vector2d& w, double tol = 1e-9) const;

    /// Reflection matrix in chart coordinates, B * assoc_cols (unit diagonal).
    Eigen::Matrix2d chart_reflection() const { return B * assoc_cols; }

    /// Builds the chart for the cone generated by the columns of M (2 x k):
    /// the boundary rays are the extreme directions of the cone, ordered so that
    /// ray ordering matches the columns of assoc, each of which must point
    /// strictly into the interior from its ray.
    static WedgeChart from_cone(const MatrixXd& M, const Eigen::Matrix2d& assoc);
};

/// Per-step drift callback: theta(state, step index) in [0,b]^p.
using DriftSchedule = std::function<VectorXd(const VectorXd&, int)>;

/// Applies reflect_step sequentially with dx_k = increments_k + G*theta(w_k)*dt.
/// `increments` holds the exogenous part (Brownian + xi*dt) per step, row-major.
/// When a chart is given, states live in original coordinates and reflection is
/// performed in chart coordinates with the chart reflection matrix.
ReflectedPath reflect_path(const VectorXd& w0, const MatrixXd& increments, const MMatrix& R,
                           const DriftSchedule& drift = nullptr, const MatrixXd* G = nullptr,
                           double dt = 0.0, const WedgeChart* chart = nullptr);

}  // namespace sct
