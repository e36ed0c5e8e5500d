#include "sct/analytic1d.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include "sct/errors.hpp"

namespace sct {

double OneDSolution::value(double w) const {
    const auto v1 = [this](double x) {
        return (h / (r * kappa)) * std::exp(-kappa * x) + h * x / r +
               C * (std::exp(kappa * x) + std::exp(-kappa * x));
    };
    if (w >= w_star) return c * (w - w_star) + v1(w_star);
    return v1(w);
}

double OneDSolution::deriv(double w) const {
    if (w >= w_star) return c;
    return (h / r) * (1.0 - std::exp(-kappa * w)) +
           C * kappa * (std::exp(kappa * w) - std::exp(-kappa * w));
}

double OneDSolution::deriv2(double w) const {
    if (w >= w_star) return 0.0;
    return kappa * (h / r) * std::exp(-kappa * w) +
           C * kappa * kappa * (std::exp(kappa * w) + std::exp(-kappa * w));
}

OneDSolution solve_singular_1d(double h, double a, double c, double r) {
    if (!(h > r * c) || !(r * c > 0.0) || !(a > 0.0))
        throw PreconditionViolated("solve_singular_1d requires h > r*c > 0 and a > 0");

    const double kappa = std::sqrt(2.0 * r / a);

    // With C eliminated through V1''(w*) = 0, the smooth-pasting condition
    // V1'(w*) = c reduces to f(w) = (h/r)(1 - sech(kappa w)) - c = 0.
    auto f = [&](double w) { return (h / r) * (1.0 - 1.0 / std::cosh(kappa * w)) - c; };
    auto fp = [&](double w) {
        const double ch = std::cosh(kappa * w);
        return (h / r) * kappa * std::sinh(kappa * w) / (ch * ch);
    };

    double lo = 0.0, hi = 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    double w = 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
        const double fw = f(w);
        if (fw > 0.0) hi = w; else lo = w;
        const double deriv = fp(w);
        double next = (deriv > 0.0) ? w - fw / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - w) <= 1e-12 * std::max(1.0, std::abs(w)) || std::abs(fw) <= 1e-14) {
            w = next;
            break;
        }
        w = next;
    }
    if (std::abs(f(w)) > 1e-8) throw NonConvergence("smooth-pasting root not found to 1e-8");

    OneDSolution sol;
    sol.h = h; sol.a = a; sol.c = c; sol.r = r; sol.kappa = kappa;
    sol.w_star = w;
    sol.C = -(h / (r * kappa)) * std::exp(-kappa * w) /
            (std::exp(kappa * w) + std::exp(-kappa * w));
    return sol;
}

DriftSolve1d solve_drift_1d(double h, double a, double c, double r, double b, double mesh,
                            double w_max_factor) {
    if (!(b > 0.0)) throw PreconditionViolated("solve_drift_1d requires b > 0");
    const OneDSolution singular = solve_singular_1d(h, a, c, r);  // validates h > rc > 0

    const double w_max = w_max_factor * singular.w_star;
    const int n = static_cast<int>(std::ceil(w_max / mesh));
    const double dw = w_max / n;
    const double diff = a / (2.0 * dw * dw);

    std::vector<double> V(n + 1, 0.0), theta(n + 1, 0.0);
    std::vector<double> sub(n + 1), diag(n + 1), sup(n + 1), rhs(n + 1), scratch(n + 1);

    auto solve_tridiag = [&]() {
        // Thomas algorithm on (sub, diag, sup) V = rhs.
        scratch[0] = sup[0] / diag[0];
        V[0] = rhs[0] / diag[0];
        for (int i = 1; i <= n; ++i) {
            const double m = diag[i] - sub[i] * scratch[i - 1];
            scratch[i] = sup[i] / m;
            V[i] = (rhs[i] - sub[i] * V[i - 1]) / m;
        }
        for (int i = n - 1; i >= 0; --i) V[i] -= scratch[i] * V[i + 1];
    };

    // Howard iteration over the bang-bang policy; upwind (backward) first
    // differences for the controlled drift keep the scheme monotone.
    for (int sweep = 0; sweep < 200; ++sweep) {
        // Reflecting row at w = 0 (ghost V[-1] = V[1]).
        sub[0] = 0.0;
        diag[0] = -(a / (dw * dw) + r);
        sup[0] = a / (dw * dw);
        rhs[0] = 0.0;
        for (int i = 1; i < n; ++i) {
            sub[i] = diff + theta[i] / dw;
            sup[i] = diff;
            diag[i] = -(2.0 * diff + theta[i] / dw + r);
            rhs[i] = -(h * i * dw + theta[i] * c);
        }
        // Far-field row: ghost V[n+1] = V[n] + dw*h/r.
        sub[n] = diff + theta[n] / dw;
        diag[n] = -(diff + theta[n] / dw + r);
        rhs[n] = -(h * n * dw + theta[n] * c) - diff * dw * h / r;
        sup[n] = 0.0;

        solve_tridiag();

        bool changed = false;
        for (int i = 1; i <= n; ++i) {
            const double dvm = (V[i] - V[i - 1]) / dw;
            const double margin = c - dvm;
            const double next = (margin < -1e-10) ? b : 0.0;  // ties resolve to no control
            if (next != theta[i]) {
                theta[i] = next;
                changed = true;
            }
        }
        if (!changed && sweep > 0) break;
    }

    // Threshold: smallest w where the centered derivative exceeds c.
    DriftSolve1d out;
    bool found = false;
    double prev_margin = -c;  // V'(0) = 0
    for (int i = 1; i < n; ++i) {
        const double dv = (V[i + 1] - V[i - 1]) / (2.0 * dw);
        const double margin = dv - c;
        if (margin > 0.0) {
            const double frac = prev_margin < 0.0 ? -prev_margin / (margin - prev_margin) : 0.0;
            out.threshold = (i - 1 + frac) * dw;
            found = true;
            break;
        }
        prev_margin = margin;
    }
    if (!found) throw GridTooCoarse("drift-control threshold not bracketed on the grid");

    out.v0 = V[0];
    auto grid = std::make_shared<std::vector<double>>(std::move(V));
    out.value = [grid, dw, n](double w) {
        const double x = std::min(std::max(w / dw, 0.0), static_cast<double>(n) - 1e-12);
        const int i = static_cast<int>(x);
        const double f = x - i;
        return (*grid)[i] * (1.0 - f) + (*grid)[i + 1] * f;
    };
    return out;
}

}  // namespace sct
