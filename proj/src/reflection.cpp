#include "sct/reflection.hpp"

#include <cmath>

#include "sct/errors.hpp"

namespace sct {

namespace {
constexpr double kFixedPointTol = 1e-12;
constexpr int kFixedPointCap = 100000;
}  // namespace

ReflectionStepResult reflect_step(const VectorXd& w, const VectorXd& dx, const MMatrix& R) {
    const auto d = w.size();
    const MatrixXd Q = R.Q();
    const VectorXd z = w + dx;

    VectorXd dy = VectorXd::Zero(d);
    for (int it = 0; it < kFixedPointCap; ++it) {
        VectorXd next = (Q * dy - z).cwiseMax(0.0);
        const double delta = (next - dy).lpNorm<Eigen::Infinity>();
        dy = std::move(next);
        if (delta <= kFixedPointTol) {
            VectorXd w_next = z + R.R * dy;
            // Floating-point hygiene: clamp tiny negatives without biasing paths.
            for (Eigen::Index i = 0; i < d; ++i) {
                if (w_next[i] < 0.0 && w_next[i] >= -1e-12) w_next[i] = 0.0;
            }
            return {std::move(w_next), std::move(dy)};
        }
    }
    throw NonConvergence("reflect_step fixed point did not converge (ill-conditioned R?)");
}

Eigen::Vector2d WedgeChart::to_orthant(const Eigen::Vector2d& w, double tol) const {
    Eigen::Vector2d z = B * w;
    if (z[0] < -tol || z[1] < -tol) throw OutsideWedge("point outside the wedge");
    return z;
}

bool WedgeChart::contains(const Eigen::Vector2d& w, double tol) const {
    const Eigen::Vector2d z = B * w;
    return z[0] >= -tol && z[1] >= -tol;
}

WedgeChart WedgeChart::from_cone(const MatrixXd& M, const Eigen::Matrix2d& assoc) {
    if (M.rows() != 2 || M.cols() < 2) throw DimensionMismatch("cone chart requires a 2 x k matrix");

    // Extreme directions of the cone: the columns of minimal and maximal angle.
    int lo = 0, hi = 0;
    double a_lo = std::numeric_limits<double>::infinity();
    double a_hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        if (M.col(j).norm() == 0.0) continue;
        const double ang = std::atan2(M(1, j), M(0, j));
        if (ang < a_lo) { a_lo = ang; lo = static_cast<int>(j); }
        if (ang > a_hi) { a_hi = ang; hi = static_cast<int>(j); }
    }
    Eigen::Vector2d ray1 = M.col(hi).normalized();  // ray 1: upper extreme
    Eigen::Vector2d ray2 = M.col(lo).normalized();  // ray 2: lower extreme

    // Inward normal of each ray: rotate the ray, orient toward the other ray.
    auto inward = [](const Eigen::Vector2d& ray, const Eigen::Vector2d& other) {
        Eigen::Vector2d n(-ray[1], ray[0]);
        if (n.dot(other) < 0.0) n = -n;
        return n;
    };
    Eigen::Vector2d n1 = inward(ray1, ray2);
    Eigen::Vector2d n2 = inward(ray2, ray1);

    // Scale so the chart reflection matrix has unit diagonal.
    const double s1 = n1.dot(assoc.col(0));
    const double s2 = n2.dot(assoc.col(1));
    if (s1 <= 0.0 || s2 <= 0.0)
        throw OutsideWedge("associated reflection column does not point into the wedge interior");
    n1 /= s1;
    n2 /= s2;

    WedgeChart chart;
    chart.B.row(0) = n1.transpose();
    chart.B.row(1) = n2.transpose();
    chart.B_inv = chart.B.inverse();
    chart.assoc_cols = assoc;
    chart.ray_dirs.col(0) = ray1;
    chart.ray_dirs.col(1) = ray2;

    if (!is_m_matrix(chart.chart_reflection()))
        throw OutsideWedge("chart reflection matrix is not an M-matrix");
    return chart;
}

ReflectedPath reflect_path(const VectorXd& w0, const MatrixXd& increments, const MMatrix& R,
                           const DriftSchedule& drift, const MatrixXd* G, double dt,
                           const WedgeChart* chart) {
    const int steps = static_cast<int>(increments.rows());
    const auto d = w0.size();

    ReflectedPath path;
    path.W.resize(steps + 1, d);
    path.dY.resize(steps, d);
    path.W.row(0) = w0.transpose();

    std::optional<MMatrix> chart_R;
    if (chart) chart_R.emplace(chart->chart_reflection());

    VectorXd w = w0;
    for (int k = 0; k < steps; ++k) {
        VectorXd dx = increments.row(k).transpose();
        if (drift) dx += (*G) * drift(w, k) * dt;
        if (chart) {
            const Eigen::Vector2d z = chart->B * w.head<2>();
            const Eigen::Vector2d dz = chart->B * dx.head<2>();
            auto step = reflect_step(z, dz, *chart_R);
            w = chart->from_orthant(step.w_next);
            path.dY.row(k) = step.dy.transpose();
        } else {
            auto step = reflect_step(w, dx, R);
            w = step.w_next;
            path.dY.row(k) = step.dy.transpose();
        }
        path.W.row(k + 1) = w.transpose();
    }
    return path;
}

}  // namespace sct
