#include <doctest.h>

#include "sct/errors.hpp"
#include "sct/problems.hpp"
#include "sct/rng.hpp"

using namespace sct;

namespace {

MatrixXd crisscross_M() { return (MatrixXd(2, 3) << 0.5, 0.5, 0, 0, 1, 1).finished(); }

VectorXd class_costs(CrissCase c) {
    switch (c) {
        case CrissCase::IIA: return (VectorXd(3) << 1, 1, 1).finished();
        case CrissCase::IIB: return (VectorXd(3) << 1, 1, 1.5).finished();
        case CrissCase::IIC: return (VectorXd(3) << 1.5, 1, 1).finished();
        case CrissCase::IID: return (VectorXd(3) << 1.5, 1, 1.5).finished();
    }
    return {};
}

}  // namespace

TEST_CASE("closed-form criss-cross costs on the reference points") {
    const HoldingCost iia = HoldingCost::crisscross_closed_form(CrissCase::IIA);
    CHECK(holding_cost(iia, (VectorXd(2) << 1, 3).finished()) == doctest::Approx(3.0));
    CHECK(holding_cost(iia, (VectorXd(2) << 1, 1).finished()) == doctest::Approx(2.0));
}

TEST_CASE("LP enumeration equals the closed forms on random cone points") {
    CounterRng rng(17, 0);
    for (const CrissCase c :
         {CrissCase::IIA, CrissCase::IIB, CrissCase::IIC, CrissCase::IID}) {
        const HoldingCost closed = HoldingCost::crisscross_closed_form(c);
        const HoldingCost lp = HoldingCost::workload_lp(class_costs(c), crisscross_M());
        for (int trial = 0; trial < 1000; ++trial) {
            const VectorXd w = (VectorXd(2) << 5.0 * rng.uniform(), 5.0 * rng.uniform()).finished();
            CHECK(std::abs(holding_cost(lp, w) - holding_cost(closed, w)) <= 1e-10);
        }
    }
}

TEST_CASE("LP holding cost is positively homogeneous") {
    CounterRng rng(18, 0);
    const HoldingCost lp =
        HoldingCost::workload_lp(class_costs(CrissCase::IIB), crisscross_M());
    for (int trial = 0; trial < 200; ++trial) {
        const VectorXd w = (VectorXd(2) << rng.uniform(), rng.uniform()).finished();
        const double alpha = 3.0 * rng.uniform();
        CHECK(holding_cost(lp, alpha * w) ==
              doctest::Approx(alpha * holding_cost(lp, w)).epsilon(1e-10));
    }
}

TEST_CASE("LP detects workloads outside the cone") {
    const HoldingCost lp = HoldingCost::workload_lp(class_costs(CrissCase::IIA), crisscross_M());
    CHECK_THROWS_AS(holding_cost(lp, (VectorXd(2) << -1, 1).finished()), InfeasibleWorkload);
}

TEST_CASE("zstar reference values and consistency with the LP minimum") {
    CHECK((zstar({1, 3}) - Eigen::Vector3d(0, 2, 1)).norm() == 0.0);
    CHECK(zstar({0, 0}).norm() == 0.0);
    const Eigen::Vector3d z11 = zstar({1, 1});
    CHECK((z11 - Eigen::Vector3d(1, 1, 0)).norm() == 0.0);
    CHECK((crisscross_M() * z11 - Eigen::Vector2d(1, 1)).norm() <= 1e-14);

    // h . z*(w) equals the closed-form cost on a grid, all four cases.
    for (const CrissCase c :
         {CrissCase::IIA, CrissCase::IIB, CrissCase::IIC, CrissCase::IID}) {
        const HoldingCost closed = HoldingCost::crisscross_closed_form(c);
        const VectorXd h = class_costs(c);
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                const Eigen::Vector2d w(0.05 * i, 0.05 * j);
                const Eigen::Vector3d z = zstar(w);
                CHECK((crisscross_M() * z - w).norm() <= 1e-12);
                CHECK(std::abs(h.dot(class_costs(c).size() == 3 ? z : z) -
                               holding_cost(closed, w)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("piecewise branches must meet at the seam") {
    CHECK_THROWS_AS(HoldingCost::piecewise((VectorXd(2) << 0, 1).finished(),
                                           (VectorXd(2) << 1, 1).finished()),
                    ConfigInvalid);
}

TEST_CASE("catalog: tandem datum") {
    const ControlProblem pr = make_tandem();
    CHECK(pr.cov.isApprox((MatrixXd(2, 2) << 2, -1, -1, 2).finished()));
    CHECK(pr.G.isApprox((MatrixXd(2, 2) << 1, 0, -1, 1).finished()));
    CHECK(pr.c.norm() == 0.0);
    CHECK(pr.gamma == doctest::Approx(4.0));
    CHECK(pr.xi.isApprox((VectorXd(2) << -1, 0).finished()));
    CHECK(pr.n_scale == doctest::Approx(400.0));
    CHECK(pr.b == doctest::Approx(20.0));
}

TEST_CASE("catalog: criss-cross IIA datum") {
    const ControlProblem pr = make_crisscross(CrissCase::IIA);
    CHECK(pr.xi.isApprox((VectorXd(2) << -0.5, -1).finished()));
    CHECK(pr.cov.isApprox((MatrixXd(2, 2) << 1, 0.5, 0.5, 2).finished()));
    CHECK(pr.G.isApprox(MatrixXd::Identity(2, 2)));
    CHECK(pr.gamma == doctest::Approx(4.0));
    // Case IIA holding parameters (1, 1, 1) through the closed form.
    CHECK(pr.holding((VectorXd(2) << 1, 3).finished()) == doctest::Approx(3.0));
    CHECK(pr.workload_M->isApprox(crisscross_M()));
}

TEST_CASE("catalog: three-station datum") {
    const ControlProblem pr = make_threestation(1);
    CHECK(pr.p == 6);
    CHECK(pr.c.isApprox((VectorXd(6) << 0, 0, 0, 2, 1, 1).finished()));
    CHECK(pr.xi.isApprox((VectorXd(2) << -5, -5).finished()));
    CHECK(pr.cov.isApprox((MatrixXd(2, 2) << 50, 54, 54, 69).finished()));
    CHECK(pr.gamma == doctest::Approx(0.1));
    CHECK(pr.b == doctest::Approx(200.0));
    CHECK(pr.space == StateSpace::wedge);

    const ControlProblem reduced = make_threestation_reduced(2);
    CHECK(reduced.p == 5);
    CHECK(reduced.c.isApprox((VectorXd(5) << 0, 0, 2, 1, 2).finished()));
    CHECK(reduced.G.col(2).isApprox((VectorXd(2) << -1, -1.5).finished()));

    CHECK(make_threestation(3).c.tail(3).isApprox((VectorXd(3) << 1.65, 1, 2.25).finished()));
    CHECK_THROWS_AS(make_threestation(4), UnknownCase);
}

TEST_CASE("three-station workload LP reduces to w1 + w2 on the wedge") {
    const ControlProblem pr = make_threestation(1);
    const VectorXd h8 = (VectorXd(8) << 6, 3, 6, 6, 1, 12, 7, 6).finished();
    const HoldingCost lp = HoldingCost::workload_lp(h8, *pr.workload_M);
    CounterRng rng(23, 0);
    for (int trial = 0; trial < 300; ++trial) {
        // Random point of the cone as a positive combination of columns.
        Eigen::Vector2d w = Eigen::Vector2d::Zero();
        for (int j = 0; j < pr.workload_M->cols(); ++j)
            w += rng.uniform() * pr.workload_M->col(j);
        CHECK(holding_cost(lp, w) == doctest::Approx(w[0] + w[1]).epsilon(1e-9));
    }
}

TEST_CASE("every catalog instance has a valid reflection structure") {
    const auto check_orthant = [](const ControlProblem& pr) {
        CHECK(is_m_matrix(pr.reflection_matrix()));
    };
    check_orthant(make_oned());
    check_orthant(make_parallel(4));
    check_orthant(make_tandem());
    check_orthant(make_crisscross(CrissCase::IIC));
    check_orthant(make_manyqueues6());

    const ControlProblem ts = make_threestation_reduced(1);
    CHECK(is_m_matrix(ts.chart->chart_reflection()));
    // Nominal drifts live in [0, b]^p.
    for (const ControlProblem& pr :
         {make_oned(), make_parallel(4), make_tandem(), make_crisscross(CrissCase::IIA),
          make_threestation_reduced(1), make_manyqueues6()}) {
        CHECK((pr.theta_tilde.array() >= 0.0).all());
        CHECK((pr.theta_tilde.array() <= pr.b).all());
        CHECK(pr.theta_tilde.size() == pr.p);
    }
}

TEST_CASE("parallel instance matches the decomposable structure") {
    const ControlProblem pr = make_parallel(3);
    CHECK(pr.p == 6);
    CHECK(pr.G.leftCols(3).isApprox(MatrixXd::Identity(3, 3)));
    CHECK(pr.G.rightCols(3).isApprox(-MatrixXd::Identity(3, 3)));
    CHECK(pr.c.head(3).norm() == 0.0);
    CHECK(pr.c.tail(3).isApprox(VectorXd::Ones(3)));
    CHECK(pr.holding((VectorXd(3) << 1, 1, 1).finished()) == doctest::Approx(6.0));
    CHECK(pr.gamma == doctest::Approx(0.1));
}

TEST_CASE("many-queues instance matches the series structure") {
    const ControlProblem pr = make_manyqueues6();
    CHECK(pr.xi[0] == doctest::Approx(-1.0));
    CHECK(pr.xi.tail(5).norm() == 0.0);
    CHECK(pr.cov(0, 0) == doctest::Approx(2.0));
    CHECK(pr.cov(0, 1) == doctest::Approx(-1.0));
    CHECK(pr.cov(0, 2) == doctest::Approx(0.0));
    CHECK(pr.holding((VectorXd(6) << 1, 0, 0, 0, 0, 0).finished()) == doctest::Approx(3.0));
    CHECK_THROWS_AS(make_manyqueues(4, VectorXd::Ones(3)), DimensionMismatch);
}

TEST_CASE("bound schedules") {
    BoundSchedule ramp{BoundSchedule::Kind::ramp, 4.0, 80.0};
    CHECK(ramp.effective(20.0, 0) == doctest::Approx(4.0));
    CHECK(ramp.effective(20.0, 800) == doctest::Approx(14.0));
    CHECK(ramp.effective(20.0, 100000) == doctest::Approx(20.0));

    BoundSchedule decay{BoundSchedule::Kind::decay_bonus, 7.0, 4800.0};
    CHECK(decay.effective(10.0, 0) == doctest::Approx(17.0));
    CHECK(decay.effective(10.0, 4800) == doctest::Approx(16.0));
    CHECK(decay.effective(10.0, 100000) == doctest::Approx(10.0));

    BoundSchedule none{};
    CHECK(none.effective(10.0, 123) == doctest::Approx(10.0));
}

TEST_CASE("make_example dispatcher") {
    CHECK(make_example("tandem").name == "tandem");
    CHECK(make_example("crisscross", 0, "IID").name == "crisscross-IID");
    CHECK(make_example("parallel", 4).d == 4);
    CHECK_THROWS_AS(make_example("nope"), UnknownCase);
    CHECK_THROWS_AS(parse_criss_case("IIE"), UnknownCase);
}
