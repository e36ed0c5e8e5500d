#include <doctest.h>

#include <cmath>

#include "sct/nn/mlp.hpp"
#include "sct/nn/tape.hpp"
#include "sct/rng.hpp"

using namespace sct;
using namespace sct::nn;

namespace {

// Scalar objective used for finite-difference checks: a composite touching
// every op class (matmul, bias broadcast, elu, min_zero, square, folds).
double composite_loss(Tape& tape, const MlpVars& vars, const Mat& X, const Mat& dirmat,
                      int* loss_id = nullptr) {
    const int x = tape.constant(X);
    auto fwd = mlp_forward_with_jvps(tape, vars, x, {Eigen::VectorXd::Unit(X.cols(), 0)});
    const int y = fwd.output;
    const int penalised = tape.min_zero(tape.add_rowvec(y, tape.constant(Mat::Constant(1, 2, 0.3))));
    const int mixed = tape.hadamard(penalised, tape.constant(dirmat));
    const int folded = tape.fold_steps(tape.rowsum(mixed), Eigen::VectorXd::LinSpaced(2, 0.5, 1.5),
                                       static_cast<int>(X.rows() / 2));
    const int jpart = tape.square(tape.matmul(fwd.jvps[0], tape.constant(Eigen::VectorXd(
                                                               Eigen::VectorXd::Ones(2)))));
    const int total = tape.add(tape.mean_all(tape.square(folded)), tape.mean_all(jpart));
    if (loss_id) *loss_id = total;
    return tape.val(total)(0, 0);
}

}  // namespace

TEST_CASE("tape gradients match central finite differences") {
    Mlp net = Mlp::create(3, 5, 2, 2, 1234);
    CounterRng rng(55, 0);
    Mat X(6, 3), dirmat(6, 2);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        for (int j = 0; j < 2; ++j) dirmat(i, j) = rng.normal();
    }

    // Analytic gradients.
    Tape tape;
    const MlpVars vars = bind_params(tape, net);
    int loss_id = -1;
    composite_loss(tape, vars, X, dirmat, &loss_id);
    tape.backward(loss_id);

    const double eps = 1e-6;
    int checked = 0;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        for (int rep = 0; rep < 3; ++rep) {
            const Eigen::Index i = static_cast<Eigen::Index>(rng.index(net.W[l].rows()));
            const Eigen::Index j = static_cast<Eigen::Index>(rng.index(net.W[l].cols()));
            Mlp plus = net, minus = net;
            plus.W[l](i, j) += eps;
            minus.W[l](i, j) -= eps;
            Tape tp, tm;
            const double fp = composite_loss(tp, bind_params(tp, plus), X, dirmat);
            const double fm = composite_loss(tm, bind_params(tm, minus), X, dirmat);
            const double fd = (fp - fm) / (2 * eps);
            const double an = tape.grad(vars.W_ids[l])(i, j);
            CHECK(an == doctest::Approx(fd).epsilon(1e-5));
            ++checked;
        }
        // One bias entry per layer.
        const Eigen::Index j = static_cast<Eigen::Index>(rng.index(net.b[l].cols()));
        Mlp plus = net, minus = net;
        plus.b[l](0, j) += eps;
        minus.b[l](0, j) -= eps;
        Tape tp, tm;
        const double fp = composite_loss(tp, bind_params(tp, plus), X, dirmat);
        const double fm = composite_loss(tm, bind_params(tm, minus), X, dirmat);
        const double an = tape.grad(vars.b_ids[l])(0, j);
        CHECK(an == doctest::Approx((fp - fm) / (2 * eps)).epsilon(1e-5));
        ++checked;
    }
    CHECK(checked >= 12);
}

TEST_CASE("mlp forward matches the tape forward") {
    const Mlp net = Mlp::create(2, 8, 3, 2, 9);
    CounterRng rng(1, 0);
    Mat X(5, 2);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = rng.normal();

    Tape tape;
    const int y = mlp_forward(tape, bind_params(tape, net), tape.constant(X));
    CHECK((tape.val(y) - net.forward(X)).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("input JVP matches finite differences and the tape JVP") {
    const Mlp net = Mlp::create(3, 10, 3, 3, 77);
    CounterRng rng(2, 0);
    Mat X(100, 3);
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 3; ++j) X(i, j) = 2.0 * rng.uniform();

    for (int dim = 0; dim < 3; ++dim) {
        const Eigen::VectorXd dir = Eigen::VectorXd::Unit(3, dim);
        const Mat jvp = net.input_jvp(X, dir);

        const double eps = 1e-5;
        Mat Xp = X, Xm = X;
        Xp.col(dim).array() += eps;
        Xm.col(dim).array() -= eps;
        const Mat fd = (net.forward(Xp) - net.forward(Xm)) / (2 * eps);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (Eigen::Index j = 0; j < 3; ++j)
                CHECK(jvp(i, j) ==
                      doctest::Approx(fd(i, j)).epsilon(1e-4).scale(std::max(1.0, std::abs(fd(i, j)))));

        Tape tape;
        const auto pair = mlp_forward_jvp(tape, bind_params(tape, net), tape.constant(X), dir);
        CHECK((tape.val(pair.second) - jvp).lpNorm<Eigen::Infinity>() <= 1e-13);
    }
}

TEST_CASE("checkpoint round-trip preserves weights exactly") {
    const Mlp net = Mlp::create(4, 6, 3, 4, 31);
    const std::string path = "/tmp/sct_test_ckpt.sctw";
    net.save(path);
    const Mlp loaded = Mlp::load(path);
    REQUIRE(loaded.W.size() == net.W.size());
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        CHECK(loaded.W[l] == net.W[l]);
        CHECK(loaded.b[l] == net.b[l]);
    }
}

TEST_CASE("adam decreases a quadratic") {
    Mat w = Mat::Constant(2, 2, 5.0);
    Adam adam;
    for (int it = 0; it < 2000; ++it) {
        Mat g = 2.0 * w;
        adam.step({&w}, {&g}, 1e-2);
    }
    CHECK(w.lpNorm<Eigen::Infinity>() <= 1e-2);
}
