#include <doctest.h>

#include <cmath>

#include "sct/analytic1d.hpp"
#include "sct/errors.hpp"

using namespace sct;

TEST_CASE("closed-form singular solution matches the reference numbers") {
    const OneDSolution sol = solve_singular_1d(2, 1, 1, 0.1);
    CHECK(sol.w_star == doctest::Approx(0.722331).epsilon(2e-4));
    CHECK(sol.C == doctest::Approx(-15.3786).epsilon(1e-3));
    CHECK(sol.value(0.0) == doctest::Approx(13.96).epsilon(1e-3));
}

TEST_CASE("smooth pasting residuals vanish") {
    const OneDSolution sol = solve_singular_1d(2, 1, 1, 0.1);
    CHECK(std::abs(sol.deriv(sol.w_star) - sol.c) <= 1e-8);
    CHECK(std::abs(sol.deriv2(sol.w_star)) <= 1e-8);
}

TEST_CASE("reflecting condition V'(0) = 0 holds identically") {
    for (const auto& [h, a, c, r] :
         {std::tuple{2.0, 1.0, 1.0, 0.1}, {5.0, 0.5, 2.0, 0.3}, {1.0, 2.0, 0.5, 0.05}}) {
        const OneDSolution sol = solve_singular_1d(h, a, c, r);
        CHECK(std::abs(sol.deriv(0.0)) <= 1e-12 * (1 + h / r));
    }
}

TEST_CASE("precondition h > r c > 0 is enforced") {
    CHECK_THROWS_AS(solve_singular_1d(0.1, 1, 2, 0.1), PreconditionViolated);
    CHECK_THROWS_AS(solve_singular_1d(2, 1, 0, 0.1), PreconditionViolated);
}

TEST_CASE("closed form agrees with an independent Runge-Kutta integration") {
    // Integrate V'' = (2/a)(r V - h w) from w = 0 with V(0) from the closed
    // form and V'(0) = 0; fourth-order steps.
    const OneDSolution sol = solve_singular_1d(2, 1, 1, 0.1);
    const double a = 1.0, h = 2.0, r = 0.1;
    const double dw = 1e-4;
    double v = sol.value(0.0), vp = 0.0;
    double w = 0.0;
    const auto f = [&](double x, double val) { return (2.0 / a) * (r * val - h * x); };
    while (w < sol.w_star) {
        // Classical RK4 on the system (V, V').
        const double k1v = vp, k1p = f(w, v);
        const double k2v = vp + 0.5 * dw * k1p, k2p = f(w + 0.5 * dw, v + 0.5 * dw * k1v);
        const double k3v = vp + 0.5 * dw * k2p, k3p = f(w + 0.5 * dw, v + 0.5 * dw * k2v);
        const double k4v = vp + dw * k3p, k4p = f(w + dw, v + dw * k3v);
        v += dw / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        vp += dw / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        w += dw;
        CHECK(std::abs(v - sol.value(w)) <= 1e-6);
    }
}

TEST_CASE("bounded-rate solver reproduces the b = 10 row") {
    const DriftSolve1d res = solve_drift_1d(2, 1, 1, 0.1, 10);
    CHECK(res.threshold == doctest::Approx(0.67).epsilon(0.015));
    CHECK(res.v0 == doctest::Approx(14.00).epsilon(0.0036));
}

TEST_CASE("bounded-rate thresholds approach the singular threshold") {
    const OneDSolution singular = solve_singular_1d(2, 1, 1, 0.1);
    const DriftSolve1d res = solve_drift_1d(2, 1, 1, 0.1, 1e4, 2e-4);
    CHECK(std::abs(res.threshold - singular.w_star) <= 0.005);
}

TEST_CASE("monotone trends in the bound") {
    double prev_thr = -1.0;
    double prev_v0 = std::numeric_limits<double>::infinity();
    for (const double b : {2.0, 5.0, 10.0, 20.0, 100.0}) {
        const DriftSolve1d res = solve_drift_1d(2, 1, 1, 0.1, b, 5e-4);
        CHECK(res.threshold >= prev_thr - 1e-6);
        CHECK(res.v0 <= prev_v0 + 1e-9);
        prev_thr = res.threshold;
        prev_v0 = res.v0;
    }
}

TEST_CASE("grid refinement changes V(0) within the consistency budget") {
    const DriftSolve1d coarse = solve_drift_1d(2, 1, 1, 0.1, 10, 4e-4);
    const DriftSolve1d fine = solve_drift_1d(2, 1, 1, 0.1, 10, 2e-4);
    CHECK(std::abs(coarse.v0 - fine.v0) <= 4 * 0.05);
}

TEST_CASE("value interpolator is consistent at the origin") {
    const DriftSolve1d res = solve_drift_1d(2, 1, 1, 0.1, 10);
    CHECK(res.value(0.0) == doctest::Approx(res.v0));
}
