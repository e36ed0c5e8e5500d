#include <doctest.h>

#include "sct/brownian.hpp"
#include "sct/errors.hpp"
#include "sct/linalg.hpp"
#include "sct/rng.hpp"

using namespace sct;

namespace {

MatrixXd tandem_cov() { return (MatrixXd(2, 2) << 2, -1, -1, 2).finished(); }
MatrixXd crisscross_cov() { return (MatrixXd(2, 2) << 1, 0.5, 0.5, 2).finished(); }

}  // namespace

TEST_CASE("cholesky reconstructs the covariance") {
    CHECK(cholesky(CovarianceMatrix(MatrixXd::Identity(2, 2)))
              .isApprox(MatrixXd::Identity(2, 2), 1e-14));

    for (const MatrixXd& A : {tandem_cov(), crisscross_cov()}) {
        const MatrixXd L = cholesky(CovarianceMatrix(A));
        const double err = (L * L.transpose() - A).lpNorm<Eigen::Infinity>();
        CHECK(err <= 1e-10 * A.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("cholesky rejects non positive definite input") {
    CHECK_THROWS_AS(cholesky(CovarianceMatrix((MatrixXd(2, 2) << 1, 2, 2, 1).finished())),
                    NotPositiveDefinite);
    CHECK_THROWS_AS(CovarianceMatrix((MatrixXd(2, 2) << 1, 0.2, 0.3, 1).finished()),
                    NotPositiveDefinite);  // asymmetric
}

TEST_CASE("cholesky reconstruction holds for random SPD matrices") {
    CounterRng rng(99, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng.index(6));
        MatrixXd B(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) B(i, j) = rng.normal();
        const MatrixXd A = B * B.transpose() + 0.1 * MatrixXd::Identity(d, d);
        const MatrixXd L = cholesky(CovarianceMatrix(A));
        CHECK((L * L.transpose() - A).lpNorm<Eigen::Infinity>() <=
              1e-10 * A.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("spectral radius on reference cases") {
    CHECK(spectral_radius(MatrixXd::Zero(3, 3)) == 0.0);
    CHECK(spectral_radius((MatrixXd(2, 2) << 0, 2, 2, 0).finished()) ==
          doctest::Approx(2.0).epsilon(1e-8));

    // Nilpotent sub-diagonal matrix (many-queues Q).
    MatrixXd Q = MatrixXd::Zero(6, 6);
    for (int i = 0; i + 1 < 6; ++i) Q(i + 1, i) = 1.0;
    CHECK(spectral_radius(Q) == 0.0);
}

TEST_CASE("spectral radius matches dense eigenvalues on random non-negative matrices") {
    CounterRng rng(7, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + static_cast<int>(rng.index(5));
        MatrixXd Q(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) Q(i, j) = rng.uniform();
        const double rho = spectral_radius(Q);
        const double exact = Q.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(rho == doctest::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("is_m_matrix on reference cases") {
    CHECK(is_m_matrix(MatrixXd::Identity(4, 4)));

    MatrixXd R = MatrixXd::Identity(6, 6);
    for (int i = 0; i + 1 < 6; ++i) R(i + 1, i) = -1.0;  // many-queues control submatrix
    CHECK(is_m_matrix(R));

    CHECK_FALSE(is_m_matrix((MatrixXd(2, 2) << 1, -2, -2, 1).finished()));
    CHECK_THROWS_AS(is_m_matrix(MatrixXd::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("is_m_matrix is invariant under simultaneous row/column permutation") {
    CounterRng rng(11, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 2 + static_cast<int>(rng.index(4));
        MatrixXd Q(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) Q(i, j) = 0.8 * rng.uniform();
        const MatrixXd R = MatrixXd::Identity(d, d) - Q;

        std::vector<int> perm(d);
        for (int i = 0; i < d; ++i) perm[i] = i;
        for (int i = d - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
        MatrixXd P = MatrixXd::Zero(d, d);
        for (int i = 0; i < d; ++i) P(perm[i], i) = 1.0;

        CHECK(is_m_matrix(R) == is_m_matrix(P.transpose() * R * P));
    }
}

TEST_CASE("sample_increments moments") {
    const int n = 1000000;

    SUBCASE("zero drift, identity covariance, dt = 1") {
        const BrownianSpec spec(VectorXd::Zero(2), CovarianceMatrix(MatrixXd::Identity(2, 2)));
        const auto inc = sample_increments(spec, TimeGrid(1.0, 1), n, 42);
        const VectorXd mean = inc.data.colwise().mean();
        const double se = 1.0 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(mean[0]) <= 4 * se);
        CHECK(std::abs(mean[1]) <= 4 * se);
    }

    SUBCASE("drift scales with dt") {
        const BrownianSpec spec((VectorXd(2) << -1, 0).finished(),
                                CovarianceMatrix(MatrixXd::Identity(2, 2)));
        const auto inc = sample_increments(spec, TimeGrid(0.1, 1), n, 43);
        const VectorXd mean = inc.data.colwise().mean();
        const double se = std::sqrt(0.1) / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(mean[0] + 0.1) <= 4 * se);
        CHECK(std::abs(mean[1]) <= 4 * se);
    }

    SUBCASE("empirical covariance equals A dt") {
        const MatrixXd A = tandem_cov();
        const double dt = 0.1;
        const BrownianSpec spec(VectorXd::Zero(2), CovarianceMatrix(A));
        const auto inc = sample_increments(spec, TimeGrid(dt, 1), n, 44);
        const MatrixXd centered = inc.data.rowwise() - inc.data.colwise().mean();
        const MatrixXd cov = centered.transpose() * centered / (n - 1.0);
        CHECK((cov - A * dt).lpNorm<Eigen::Infinity>() <= 5e-3 * dt);
    }
}

TEST_CASE("sample_increments determinism and stream layout") {
    const BrownianSpec spec(VectorXd::Zero(1), CovarianceMatrix(MatrixXd::Identity(1, 1)));
    const TimeGrid grid(1.0, 8);
    const auto a = sample_increments(spec, grid, 4, 5);
    const auto b = sample_increments(spec, grid, 4, 5);
    CHECK(a.data == b.data);  // bitwise

    const auto c = sample_increments(spec, grid, 4, 6);
    CHECK(a.data != c.data);

    // Replication r of a batch equals replication 0 of a shifted sub-stream.
    const auto shifted = sample_increments(spec, grid, 1, 5, 3);
    CHECK(shifted.data == a.data.middleRows(3 * 8, 8));
}

TEST_CASE("normal quantile reference values") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845400545).epsilon(1e-10));
    CHECK(normal_quantile(0.001) == doctest::Approx(-3.0902323061678132).epsilon(1e-10));
}

TEST_CASE("box-muller normals have the right moments") {
    CounterRng rng(3, 0, NormalMethod::box_muller);
    const int n = 200000;
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        mean += z;
        var += z * z;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) <= 6.0 / std::sqrt(n));
}

TEST_CASE("time grid and spec invariants") {
    const TimeGrid grid(0.1, 64);
    CHECK(std::abs(grid.dt * grid.num_steps - grid.horizon) <= 1e-12);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), ConfigInvalid);
    CHECK_THROWS_AS(BrownianSpec(VectorXd::Zero(2), CovarianceMatrix(MatrixXd::Identity(3, 3))),
                    DimensionMismatch);
}
