#include <doctest.h>

#include <optional>

#include "sct/brownian.hpp"
#include "sct/errors.hpp"
#include "sct/problems.hpp"
#include "sct/reflection.hpp"
#include "sct/rng.hpp"

using namespace sct;

namespace {

// Independent oracle for d <= 3: enumerate active sets J, solve
// (w + dx)_J + (R dy)_J = 0 with dy zero off J, keep the feasible
// complementary solution.
std::optional<VectorXd> active_set_oracle(const VectorXd& w, const VectorXd& dx,
                                          const MatrixXd& R) {
    const int d = static_cast<int>(w.size());
    const VectorXd z = w + dx;
    for (int mask = 0; mask < (1 << d); ++mask) {
        std::vector<int> J;
        for (int i = 0; i < d; ++i)
            if (mask & (1 << i)) J.push_back(i);
        MatrixXd RJ(J.size(), J.size());
        VectorXd zJ(J.size());
        for (std::size_t a = 0; a < J.size(); ++a) {
            zJ[a] = z[J[a]];
            for (std::size_t b = 0; b < J.size(); ++b) RJ(a, b) = R(J[a], J[b]);
        }
        VectorXd dy = VectorXd::Zero(d);
        if (!J.empty()) {
            const VectorXd dyJ = RJ.fullPivLu().solve(-zJ);
            bool ok = true;
            for (std::size_t a = 0; a < J.size(); ++a) {
                if (dyJ[a] < -1e-12) ok = false;
                dy[J[a]] = dyJ[a];
            }
            if (!ok) continue;
        }
        const VectorXd w_next = z + R * dy;
        if ((w_next.array() >= -1e-9).all()) return dy;
    }
    return std::nullopt;
}

MMatrix random_m_matrix(CounterRng& rng, int d) {
    MatrixXd Q(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) Q(i, j) = rng.uniform();
    Q *= 0.8 / std::max(1e-12, spectral_radius(Q));
    return MMatrix(MatrixXd::Identity(d, d) - Q);
}

}  // namespace

TEST_CASE("one-dimensional Skorokhod steps") {
    const MMatrix R(MatrixXd::Identity(1, 1));
    auto hit = reflect_step((VectorXd(1) << 1).finished(), (VectorXd(1) << -2).finished(), R);
    CHECK(hit.dy[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hit.w_next[0] == doctest::Approx(0.0).epsilon(1e-12));

    auto interior =
        reflect_step((VectorXd(1) << 1).finished(), (VectorXd(1) << 0.5).finished(), R);
    CHECK(interior.dy[0] == 0.0);
    CHECK(interior.w_next[0] == doctest::Approx(1.5));
}

TEST_CASE("tandem corner step pushes both components") {
    const MMatrix R((MatrixXd(2, 2) << 1, 0, -1, 1).finished());
    const auto step =
        reflect_step(VectorXd::Zero(2), (VectorXd(2) << -1, 0).finished(), R);
    CHECK(step.dy[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(step.dy[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(step.w_next.lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("reflect_step agrees with the active-set oracle for d <= 3") {
    CounterRng rng(21, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + static_cast<int>(rng.index(3));
        const MMatrix R = random_m_matrix(rng, d);
        VectorXd w(d), dx(d);
        for (int i = 0; i < d; ++i) {
            w[i] = rng.uniform();
            dx[i] = 2.0 * rng.normal();
        }
        const auto oracle = active_set_oracle(w, dx, R.R);
        REQUIRE(oracle.has_value());
        const auto step = reflect_step(w, dx, R);
        CHECK((step.dy - *oracle).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
}

TEST_CASE("reflect_path basics") {
    const MMatrix R(MatrixXd::Identity(2, 2));

    SUBCASE("zero increments keep an interior state fixed") {
        const auto path =
            reflect_path((VectorXd(2) << 1, 2).finished(), MatrixXd::Zero(16, 2), R);
        CHECK((path.W.bottomRows(1).transpose() - (VectorXd(2) << 1, 2).finished()).norm() == 0.0);
        CHECK(path.dY.lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("pure negative drift from the origin accumulates Y = T") {
        const int steps = 512;
        const double dt = 1.0 / steps;
        const MMatrix R1(MatrixXd::Identity(1, 1));
        const MatrixXd inc = MatrixXd::Constant(steps, 1, -dt);
        const auto path = reflect_path(VectorXd::Zero(1), inc, R1);
        CHECK(path.y_total()[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(path.W.cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("discrete paths satisfy the closed-form 1-D Skorokhod identity") {
    CounterRng rng(31, 0);
    const int steps = 400;
    const double w0 = 0.3;
    MatrixXd inc(steps, 1);
    for (int k = 0; k < steps; ++k) inc(k, 0) = 0.1 * rng.normal() - 0.01;
    const auto path = reflect_path((VectorXd(1) << w0).finished(), inc, MMatrix(MatrixXd::Identity(1, 1)));

    double cum = 0.0, running_max = 0.0, y = 0.0;
    for (int k = 0; k < steps; ++k) {
        cum += inc(k, 0);
        running_max = std::max(running_max, -w0 - cum);
        y += path.dY(k, 0);
        CHECK(y == doctest::Approx(std::max(0.0, running_max)).epsilon(1e-12));
        CHECK(path.W(k + 1, 0) == doctest::Approx(w0 + cum + y).epsilon(1e-12));
    }
}

TEST_CASE("reflected tandem paths keep the defining invariants") {
    const ControlProblem pr = make_tandem();
    const MMatrix R(pr.reflection_matrix());
    const BrownianSpec spec(pr.xi, CovarianceMatrix(pr.cov));
    const TimeGrid grid(0.5, 320);
    const auto inc = sample_increments(spec, grid, 1, 77);

    MatrixXd steps(grid.num_steps, 2);
    for (int k = 0; k < grid.num_steps; ++k) steps.row(k) = inc.data.row(k);
    const auto path = reflect_path(VectorXd::Zero(2), steps, R);

    double comp_sum = 0.0;
    for (int k = 0; k < grid.num_steps; ++k) {
        CHECK(path.dY(k, 0) >= 0.0);
        CHECK(path.dY(k, 1) >= 0.0);
        CHECK(path.W(k + 1, 0) >= -1e-12);
        CHECK(path.W(k + 1, 1) >= -1e-12);
        // Per-step complementarity from the fixed point.
        CHECK(path.W(k + 1, 0) * path.dY(k, 0) <= 1e-9);
        CHECK(path.W(k + 1, 1) * path.dY(k, 1) <= 1e-9);
        comp_sum += path.W.row(k + 1).dot(path.dY.row(k));
    }
    CHECK(comp_sum <= 1e-6);
}

TEST_CASE("wedge chart for the three-station cone") {
    const ControlProblem pr = make_threestation(1);
    const WedgeChart& chart = *pr.chart;

    SUBCASE("boundary rays map to the orthant axes") {
        const Eigen::Vector2d vertical = chart.to_orthant({0.0, 2.5});
        CHECK(vertical[0] == doctest::Approx(0.0).epsilon(1e-12));
        const Eigen::Vector2d oblique = chart.to_orthant({4.0, 3.0});
        CHECK(oblique[1] == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("interior points round-trip") {
        CounterRng rng(5, 0);
        for (int trial = 0; trial < 100; ++trial) {
            const double z1 = rng.uniform() * 10, z2 = rng.uniform() * 10;
            const Eigen::Vector2d w = chart.from_orthant({z1, z2});
            const Eigen::Vector2d z = chart.to_orthant(w);
            CHECK((z - Eigen::Vector2d(z1, z2)).norm() <= 1e-12 * (1 + z1 + z2));
        }
    }

    SUBCASE("points outside the wedge are rejected") {
        CHECK_THROWS_AS(chart.to_orthant({1.0, -0.5}), OutsideWedge);
        CHECK_THROWS_AS(chart.to_orthant({4.0, 2.0}), OutsideWedge);
    }

    SUBCASE("associated pushes point back into the cone") {
        CounterRng rng(6, 0);
        for (int trial = 0; trial < 100; ++trial) {
            // Random point on each boundary ray, pushed by its column.
            const double s = 5.0 * rng.uniform();
            const Eigen::Vector2d on_vertical = s * chart.ray_dirs.col(0);
            const Eigen::Vector2d pushed1 =
                on_vertical + 0.1 * chart.assoc_cols.col(0);
            CHECK(chart.contains(pushed1));
            const Eigen::Vector2d on_oblique = s * chart.ray_dirs.col(1);
            const Eigen::Vector2d pushed2 = on_oblique + 0.1 * chart.assoc_cols.col(1);
            CHECK(chart.contains(pushed2));
        }
    }

    SUBCASE("chart reflection matrix is an M-matrix with unit diagonal") {
        const Eigen::Matrix2d Rc = chart.chart_reflection();
        CHECK(Rc(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(Rc(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(is_m_matrix(Rc));
    }
}

TEST_CASE("reflect_path with a wedge chart stays inside the cone") {
    const ControlProblem pr = make_threestation_reduced(1);
    const BrownianSpec spec(pr.xi, CovarianceMatrix(pr.cov));
    const TimeGrid grid(0.2, 128);
    const auto inc = sample_increments(spec, grid, 1, 13);

    MatrixXd steps(grid.num_steps, 2);
    for (int k = 0; k < grid.num_steps; ++k) steps.row(k) = inc.data.row(k);
    const MMatrix R(pr.chart->chart_reflection());
    const auto path = reflect_path(VectorXd::Zero(2), steps, R, nullptr, nullptr, 0.0,
                                   &*pr.chart);
    for (int k = 0; k <= grid.num_steps; ++k) {
        CHECK(pr.chart->contains(path.W.row(k).transpose(), 1e-9));
    }
}
