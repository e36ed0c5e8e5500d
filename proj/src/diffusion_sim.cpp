#include "sct/diffusion_sim.hpp"

#include <cmath>

#include "sct/errors.hpp"
#include "sct/parallel.hpp"

namespace sct {

RegionFn make_grid_cached_region(const RegionFn& fn, int p, double w1_max, double w2_max, int n1,
                                 int n2) {
    auto cache = std::make_shared<std::vector<char>>(
        static_cast<std::size_t>(n1 + 1) * (n2 + 1) * p, 0);
    std::vector<bool> active(p);
    VectorXd w(2);
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            w[0] = w1_max * i / n1;
            w[1] = w2_max * j / n2;
            fn(w, active);
            for (int k = 0; k < p; ++k)
                (*cache)[(static_cast<std::size_t>(i) * (n2 + 1) + j) * p + k] = active[k] ? 1 : 0;
        }
    const double s1 = n1 / w1_max, s2 = n2 / w2_max;
    return [cache, fn, p, n1, n2, s1, s2](const VectorXd& w, std::vector<bool>& out) {
        const double x1 = w[0] * s1, x2 = w[1] * s2;
        if (x1 < -0.5 || x1 > n1 + 0.5 || x2 < -0.5 || x2 > n2 + 0.5) {
            fn(w, out);
            return;
        }
        const int i = std::min(std::max(static_cast<int>(std::lround(x1)), 0), n1);
        const int j = std::min(std::max(static_cast<int>(std::lround(x2)), 0), n2);
        for (int k = 0; k < p; ++k)
            out[k] = (*cache)[(static_cast<std::size_t>(i) * (n2 + 1) + j) * p + k] != 0;
    };
}

RegionFn threshold_region(const ControlProblem& pr, double threshold) {
    // Downward column of coordinate i: the column equal to -e_i.
    std::vector<int> down_col(pr.d, -1);
    for (int j = 0; j < pr.p; ++j) {
        int nz = -1;
        bool single = true;
        for (int i = 0; i < pr.d; ++i) {
            if (pr.G(i, j) != 0.0) {
                if (nz >= 0) single = false;
                nz = i;
            }
        }
        if (single && nz >= 0 && pr.G(nz, j) < 0.0) down_col[nz] = j;
    }
    const int p = pr.p;
    return [down_col, threshold, p](const VectorXd& w, std::vector<bool>& active) {
        std::fill(active.begin(), active.end(), false);
        for (std::size_t i = 0; i < down_col.size(); ++i)
            if (down_col[i] >= 0 && w[static_cast<Eigen::Index>(i)] > threshold)
                active[down_col[i]] = true;
        (void)p;
    };
}

RegionFn no_control_region(int p) {
    (void)p;
    return [](const VectorXd&, std::vector<bool>& active) {
        std::fill(active.begin(), active.end(), false);
    };
}

namespace {

struct RepAccum {
    double total = 0.0;
    VectorXd coord;
};

}  // namespace

DiffusionRunResult simulate_policy_value(const ControlProblem& pr, const RegionFn& region,
                                         const DiffusionSimConfig& cfg) {
    const int d = pr.d, p = pr.p;
    const double dt = cfg.dt;
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : std::log(1e6) / pr.gamma;
    const long steps = static_cast<long>(std::ceil(horizon / dt));
    const double fac = std::exp(-pr.gamma * dt);

    VectorXd unit = cfg.unit_step.size() ? cfg.unit_step : VectorXd(VectorXd::Constant(d, 0.01));
    if (unit.size() != d) throw ConfigInvalid("unit_step length must equal d");

    const MatrixXd L = cholesky(CovarianceMatrix(pr.cov)) * std::sqrt(dt);
    const VectorXd drift = pr.xi * dt;
    const VectorXd pi_hat = pr.pi_hat();

    // Control step per column: largest displacement component matches the
    // per-dimension unit step.
    VectorXd col_step(p);
    std::vector<int> col_coord(p, -1);  // single-coordinate columns
    for (int j = 0; j < p; ++j) {
        double s = std::numeric_limits<double>::infinity();
        int nz = -1, count = 0;
        for (int i = 0; i < d; ++i) {
            if (pr.G(i, j) != 0.0) {
                s = std::min(s, unit[i] / std::abs(pr.G(i, j)));
                nz = i;
                ++count;
            }
        }
        col_step[j] = std::isfinite(s) ? s : 0.0;
        if (count == 1) col_coord[j] = nz;
    }

    // Boundary pushes: the associated reflection columns.
    MatrixXd refl_cols(d, d);
    VectorXd refl_step(d);
    if (pr.space == StateSpace::wedge) {
        refl_cols.setZero();
        refl_cols.topLeftCorner(2, 2) = pr.chart->assoc_cols;
        for (int i = 0; i < 2; ++i) {
            double s = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 2; ++k)
                if (refl_cols(k, i) != 0.0) s = std::min(s, unit[k] / std::abs(refl_cols(k, i)));
            refl_step[i] = s;
        }
    } else {
        refl_cols = pr.reflection_matrix();
        for (int i = 0; i < d; ++i) {
            double s = std::numeric_limits<double>::infinity();
            for (int k = 0; k < d; ++k)
                if (refl_cols(k, i) != 0.0) s = std::min(s, unit[k] / std::abs(refl_cols(k, i)));
            refl_step[i] = s;
        }
    }

    const bool linear_h = pr.h.kind == HoldingCost::Kind::linear;
    bool per_coord = linear_h;
    for (int j = 0; j < p && per_coord; ++j)
        if (col_coord[j] < 0) per_coord = false;

    std::vector<RepAccum> acc(cfg.reps);
    const int nthreads = effective_workers(cfg.workers);
    bool push_overflow = false;

#pragma omp parallel num_threads(nthreads)
    {
        std::vector<bool> active(p);
        VectorXd w(d), z(d);
#pragma omp for schedule(dynamic, 16)
        for (long rep = 0; rep < cfg.reps; ++rep) {
            CounterRng rng(cfg.seed, static_cast<uint64_t>(rep), cfg.normal_method);
            w.setZero();
            double disc = 1.0;
            RepAccum a;
            a.coord = VectorXd::Zero(d);

            for (long step = 0; step < steps; ++step) {
                // Left-endpoint holding accrual.
                if (linear_h) {
                    for (int i = 0; i < d; ++i) {
                        const double ci = pr.h.h_lin[i] * w[i] * disc * dt;
                        a.total += ci;
                        a.coord[i] += ci;
                    }
                } else {
                    a.total += pr.holding(w) * disc * dt;
                }

                for (int i = 0; i < d; ++i) z[i] = rng.normal();
                w += drift + L * z;

                long pushes = 0;
                bool moved = true;
                while (moved && pushes <= cfg.max_pushes_per_step) {
                    moved = false;
                    if (pr.space == StateSpace::wedge) {
                        Eigen::Vector2d zc = pr.chart->B * w.head<2>();
                        while (zc[0] < 0.0 || zc[1] < 0.0) {
                            const int i = zc[0] < 0.0 ? 0 : 1;
                            w.head<2>() += pr.chart->assoc_cols.col(i) * refl_step[i];
                            a.total += pi_hat[i] * refl_step[i] * disc;
                            zc = pr.chart->B * w.head<2>();
                            moved = true;
                            if (++pushes > cfg.max_pushes_per_step) break;
                        }
                    } else {
                        for (int i = 0; i < d; ++i) {
                            while (w[i] < 0.0) {
                                w += refl_cols.col(i) * refl_step[i];
                                const double push_cost = pi_hat[i] * refl_step[i] * disc;
                                a.total += push_cost;
                                a.coord[i] += push_cost;
                                moved = true;
                                if (++pushes > cfg.max_pushes_per_step) break;
                            }
                        }
                    }

                    region(w, active);
                    for (int j = 0; j < p; ++j) {
                        if (active[j] && col_step[j] > 0.0) {
                            w += pr.G.col(j) * col_step[j];
                            const double push_cost = pr.c[j] * col_step[j] * disc;
                            a.total += push_cost;
                            if (col_coord[j] >= 0) a.coord[col_coord[j]] += push_cost;
                            moved = true;
                            if (++pushes > cfg.max_pushes_per_step) break;
                        }
                    }
                }
                if (pushes > cfg.max_pushes_per_step) {
#pragma omp atomic write
                    push_overflow = true;
                    break;
                }
                disc *= fac;
            }
            acc[rep] = std::move(a);
        }
    }
    if (push_overflow) throw NonConvergence("unit-step pushes did not readmit the state");

    DiffusionRunResult out;
    double mean = 0.0;
    for (const auto& a : acc) mean += a.total;
    mean /= static_cast<double>(cfg.reps);
    double var = 0.0;
    for (const auto& a : acc) var += (a.total - mean) * (a.total - mean);
    var /= std::max<long>(1, cfg.reps - 1);
    out.estimate = {mean, std::sqrt(var / static_cast<double>(cfg.reps)), cfg.reps, horizon};

    if (per_coord) {
        VectorXd cm = VectorXd::Zero(d), cv = VectorXd::Zero(d);
        for (const auto& a : acc) cm += a.coord;
        cm /= static_cast<double>(cfg.reps);
        for (const auto& a : acc) cv += (a.coord - cm).cwiseProduct(a.coord - cm);
        cv /= std::max<long>(1, cfg.reps - 1);
        out.coord_mean = cm;
        out.coord_std_error = (cv / static_cast<double>(cfg.reps)).cwiseSqrt();
    }
    return out;
}

}  // namespace sct
