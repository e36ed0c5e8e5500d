#pragma once

#include <functional>

namespace sct {

/// Closed-form solution of the one-dimensional singular control problem with a
/// reflecting origin: an upper barrier at w_star and value
///   V1(w) = (h/(r*kappa)) e^{-kappa w} + h w / r + C (e^{kappa w} + e^{-kappa w}),
/// kappa = sqrt(2r/a), continued linearly with slope c above w_star.
struct OneDSolution {
    double w_star = 0.0;
    double C = 0.0;
    double h = 0.0, a = 0.0, c = 0.0, r = 0.0, kappa = 0.0;

    double value(double w) const;
    double deriv(double w) const;
    double deriv2(double w) const;
};

/// Solves V1'(w_star) = c, V1''(w_star) = 0 by safeguarded Newton/bisection to
/// 1e-8. Requires h > r*c > 0; throws PreconditionViolated otherwise.
OneDSolution solve_singular_1d(double h, double a, double c, double r);

/// Bounded-rate counterpart: monotone upwind finite differences for
///   r V = (a/2) V'' + h w + min_{theta in [0,b]} theta (c - V'),
/// reflecting condition V'(0) = 0, far field V' -> h/r. Returns the bang-bang
/// threshold (smallest w with V' > c) and V(0).
struct DriftSolve1d {
    double threshold = 0.0;
    double v0 = 0.0;
    // Grid solution kept for diagnostics and refinement checks.
    std::function<double(double)> value;
};

DriftSolve1d solve_drift_1d(double h, double a, double c, double r, double b,
                            double mesh = 2e-4, double w_max_factor = 10.0);

}  // namespace sct
