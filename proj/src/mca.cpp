#include "sct/mca.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>

#include "sct/errors.hpp"

namespace sct {

namespace {

// Push an off-space point back along the associated reflection columns
// ((1,0) at the vertical axis, (0,1) at the oblique ray), then clamp at the
// outer truncation.
void remap_point(const McaProblem& mca, double& x1, double& x2) {
    if (x1 < 0.0) x1 = 0.0;
    if (x2 < mca.wedge_slope * x1) x2 = mca.wedge_slope * x1;
    x1 = std::min(x1, mca.grid.n1 * mca.grid.h1);
    x2 = std::min(x2, mca.grid.n2 * mca.grid.h2);
}

long remap_node(const McaProblem& mca, int i, int j) {
    i = std::max(0, std::min(i, mca.grid.n1));
    // Oblique-ray push: raise j until (i, j) is inside the wedge.
    const double min_x2 = mca.wedge_slope * i * mca.grid.h1;
    const int j_min = static_cast<int>(std::ceil(min_x2 / mca.grid.h2 - 1e-9));
    j = std::max(j, j_min);
    j = std::max(0, std::min(j, mca.grid.n2));
    const long s = mca.state_at(i, j);
    if (s < 0) throw InvalidProbabilities("remapped node is outside the state space");
    return s;
}

McaProblem::InterpTarget interp_point(const McaProblem& mca, double x1, double x2) {
    remap_point(mca, x1, x2);
    const double fi = x1 / mca.grid.h1;
    const double fj = x2 / mca.grid.h2;
    int i0 = static_cast<int>(std::floor(fi));
    int j0 = static_cast<int>(std::floor(fj));
    i0 = std::max(0, std::min(i0, mca.grid.n1 - 1));
    j0 = std::max(0, std::min(j0, mca.grid.n2 - 1));
    const double a = std::min(std::max(fi - i0, 0.0), 1.0);
    const double b = std::min(std::max(fj - j0, 0.0), 1.0);

    McaProblem::InterpTarget out{};
    const double w[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
    const int di[4] = {0, 1, 0, 1};
    const int dj[4] = {0, 0, 1, 1};
    for (int k = 0; k < 4; ++k) {
        out.state[k] = static_cast<int32_t>(remap_node(mca, i0 + di[k], j0 + dj[k]));
        out.weight[k] = w[k];
    }
    return out;
}

}  // namespace

McaProblem build_mca(const ControlProblem& pr, const McaGrid& grid) {
    if (pr.d != 2) throw DimensionMismatch("the chain approximation is built for d = 2");

    McaProblem mca;
    mca.grid = grid;
    mca.gamma = pr.gamma;
    if (pr.space == StateSpace::wedge) {
        // Oblique boundary ray direction from the chart; slope of the lower ray.
        const auto ray = pr.chart->ray_dirs.col(1);
        mca.wedge_slope = ray[1] / ray[0];
    }

    const double a11 = pr.cov(0, 0), a22 = pr.cov(1, 1), a12 = pr.cov(0, 1);
    const double h1 = grid.h1, h2 = grid.h2;
    const double mu1 = pr.xi[0], mu2 = pr.xi[1];

    const double Qh = a11 / (h1 * h1) + a22 / (h2 * h2) - std::abs(a12) / (h1 * h2) +
                      std::abs(mu1) / h1 + std::abs(mu2) / h2;
    mca.dt = 1.0 / Qh;

    auto add = [&](int di, int dj, double q) {
        if (q == 0.0) return;
        const double p = q / Qh;
        if (p < -1e-12 || p > 1.0 + 1e-12)
            throw InvalidProbabilities("locally consistent transition probability outside [0,1]");
        mca.stencil.push_back({di, dj, std::max(p, 0.0)});
    };
    const double cross = std::abs(a12) / (2.0 * h1 * h2);
    add(+1, 0, a11 / (2 * h1 * h1) - cross + std::max(mu1, 0.0) / h1);
    add(-1, 0, a11 / (2 * h1 * h1) - cross + std::max(-mu1, 0.0) / h1);
    add(0, +1, a22 / (2 * h2 * h2) - cross + std::max(mu2, 0.0) / h2);
    add(0, -1, a22 / (2 * h2 * h2) - cross + std::max(-mu2, 0.0) / h2);
    if (a12 > 0.0) {
        add(+1, +1, cross);
        add(-1, -1, cross);
    } else if (a12 < 0.0) {
        add(+1, -1, cross);
        add(-1, +1, cross);
    }
    double total = 0.0;
    for (const auto& e : mca.stencil) {
        if (e.p < 0.0 || e.p > 1.0) throw InvalidProbabilities("stencil probability outside [0,1]");
        total += e.p;
    }
    if (total > 1.0 + 1e-12) throw InvalidProbabilities("stencil probabilities exceed 1");

    // State enumeration over wedge nodes.
    mca.node_to_state.assign(static_cast<long>(grid.n1 + 1) * (grid.n2 + 1), -1);
    for (int i = 0; i <= grid.n1; ++i) {
        for (int j = 0; j <= grid.n2; ++j) {
            const double x1 = i * h1, x2 = j * h2;
            if (x2 >= mca.wedge_slope * x1 - 1e-9) {
                mca.node_to_state[static_cast<long>(i) * (grid.n2 + 1) + j] =
                    static_cast<long>(mca.state_to_node.size());
                mca.state_to_node.emplace_back(i, j);
            }
        }
    }

    const long S = mca.num_states();
    mca.cost_rate.resize(S);
    for (long s = 0; s < S; ++s) mca.cost_rate[s] = pr.holding(mca.coords(s));

    // Control jumps, one grid-cell sized step per column.
    for (int jcol = 0; jcol < pr.p; ++jcol) {
        const Eigen::Vector2d col = pr.G.col(jcol);
        if (col.norm() == 0.0) continue;
        double step = std::numeric_limits<double>::infinity();
        if (col[0] != 0.0) step = std::min(step, h1 / std::abs(col[0]));
        if (col[1] != 0.0) step = std::min(step, h2 / std::abs(col[1]));
        McaProblem::Jump jump;
        jump.delta = col * step;
        jump.cost = pr.c[jcol] * step;
        jump.control_index = jcol;
        jump.zero_cost = pr.c[jcol] == 0.0;
        mca.jumps.push_back(jump);
    }

    // Resolve stencil neighbors and jump targets per state.
    mca.neighbors.resize(S * static_cast<long>(mca.stencil.size()));
    mca.jump_targets.resize(S * static_cast<long>(mca.jumps.size()));
    for (long s = 0; s < S; ++s) {
        const auto [i, j] = mca.state_to_node[s];
        for (std::size_t e = 0; e < mca.stencil.size(); ++e)
            mca.neighbors[s * mca.stencil.size() + e] =
                static_cast<int32_t>(remap_node(mca, i + mca.stencil[e].di, j + mca.stencil[e].dj));
        const Eigen::Vector2d w = mca.coords(s);
        for (std::size_t jj = 0; jj < mca.jumps.size(); ++jj)
            mca.jump_targets[s * mca.jumps.size() + jj] =
                interp_point(mca, w[0] + mca.jumps[jj].delta[0], w[1] + mca.jumps[jj].delta[1]);
    }
    return mca;
}

namespace {

double continuation_value(const McaProblem& mca, const std::vector<double>& v, long s,
                          double beta) {
    double ev = 0.0;
    const std::size_t E = mca.stencil.size();
    const int32_t* nb = &mca.neighbors[s * E];
    double psum = 0.0;
    for (std::size_t e = 0; e < E; ++e) {
        ev += mca.stencil[e].p * v[nb[e]];
        psum += mca.stencil[e].p;
    }
    ev += (1.0 - psum) * v[s];  // self mass retained by the outer clamp
    return mca.cost_rate[s] * mca.dt + beta * ev;
}

double jump_value(const McaProblem& mca, const std::vector<double>& v, long s, std::size_t j) {
    const auto& t = mca.jump_targets[s * mca.jumps.size() + j];
    double ev = 0.0;
    for (int k = 0; k < 4; ++k) ev += t.weight[k] * v[t.state[k]];
    return mca.jumps[j].cost + ev;
}

}  // namespace

McaSolution mca_solve(const McaProblem& mca, double eps, McaMethod method, int max_iter) {
    const long S = mca.num_states();
    const std::size_t J = mca.jumps.size();
    const double beta = std::exp(-mca.gamma * mca.dt);

    McaSolution sol;
    sol.value.assign(S, 0.0);

    if (method == McaMethod::value_iteration) {
        if (max_iter == 0) max_iter = 2000000;
        std::vector<double> next(S, 0.0);
        for (int it = 0; it < max_iter; ++it) {
            double sup = 0.0;
#pragma omp parallel for schedule(static) reduction(max : sup)
            for (long s = 0; s < S; ++s) {
                double best = continuation_value(mca, sol.value, s, beta);
                for (std::size_t j = 0; j < J; ++j) {
                    if (mca.jumps[j].zero_cost) continue;
                    best = std::min(best, jump_value(mca, sol.value, s, j));
                }
                next[s] = best;
                sup = std::max(sup, std::abs(best - sol.value[s]));
            }
            sol.value.swap(next);
            ++sol.iterations;
            if (sup < eps) break;
        }
    } else {
        // Howard iteration: greedy labels, then exact policy evaluation by
        // sparse LU. Positive-cost jumps strictly decrease i+j (including
        // through boundary remaps), so the jump sub-graph is acyclic and the
        // policy systems are non-singular.
        if (max_iter == 0) max_iter = 100;
        std::vector<int> label(S, -1);  // -1: continue, else jump index
        for (int it = 0; it < max_iter; ++it) {
            std::vector<int> new_label(S, -1);
#pragma omp parallel for schedule(static)
            for (long s = 0; s < S; ++s) {
                const double cont = continuation_value(mca, sol.value, s, beta);
                double best = cont;
                int pick = -1;
                for (std::size_t j = 0; j < J; ++j) {
                    if (mca.jumps[j].zero_cost) continue;
                    const double jv = jump_value(mca, sol.value, s, j);
                    if (jv < best - 1e-12) {
                        best = jv;
                        pick = static_cast<int>(j);
                    }
                }
                new_label[s] = pick;
            }
            const bool stable = (it > 0 && new_label == label);
            label = std::move(new_label);
            ++sol.iterations;
            if (stable) break;

            // Policy evaluation: V = cost + beta * P V on continuation rows,
            // V = jump cost + interpolated V on jump rows.
            using Triplet = Eigen::Triplet<double>;
            std::vector<Triplet> trip;
            trip.reserve(S * 10);
            Eigen::VectorXd rhs(S);
            for (long s = 0; s < S; ++s) {
                if (label[s] < 0) {
                    double diag = 1.0;
                    double psum = 0.0;
                    const std::size_t E = mca.stencil.size();
                    const int32_t* nb = &mca.neighbors[s * E];
                    for (std::size_t e = 0; e < E; ++e) {
                        psum += mca.stencil[e].p;
                        if (nb[e] == s)
                            diag -= beta * mca.stencil[e].p;
                        else
                            trip.emplace_back(s, nb[e], -beta * mca.stencil[e].p);
                    }
                    diag -= beta * (1.0 - psum);
                    trip.emplace_back(s, s, diag);
                    rhs[s] = mca.cost_rate[s] * mca.dt;
                } else {
                    const auto& t = mca.jump_targets[s * J + label[s]];
                    double diag = 1.0;
                    for (int k = 0; k < 4; ++k) {
                        if (t.state[k] == s)
                            diag -= t.weight[k];
                        else
                            trip.emplace_back(s, t.state[k], -t.weight[k]);
                    }
                    trip.emplace_back(s, s, diag);
                    rhs[s] = mca.jumps[label[s]].cost;
                }
            }
            Eigen::SparseMatrix<double> A(S, S);
            A.setFromTriplets(trip.begin(), trip.end());
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(A);
            if (lu.info() != Eigen::Success)
                throw NonConvergence("policy evaluation system is singular; try value_iteration");
            const Eigen::VectorXd v = lu.solve(rhs);
            for (long s = 0; s < S; ++s) sol.value[s] = v[s];
        }
    }

    // Activity flags: jump value strictly better than continuation.
    sol.active.assign(S * J, 0);
#pragma omp parallel for schedule(static)
    for (long s = 0; s < S; ++s) {
        const double cont = continuation_value(mca, sol.value, s, beta);
        for (std::size_t j = 0; j < J; ++j) {
            const double jv = jump_value(mca, sol.value, s, j);
            const double tol = 1e-8 * (1.0 + std::abs(cont));
            sol.active[s * J + j] = (jv < cont - tol) ? 1 : 0;
        }
    }
    return sol;
}

void export_mca_labels_csv(const std::string& path, const McaProblem& mca,
                           const McaSolution& sol) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ArtifactMissing("cannot open label output: " + path);
    std::fprintf(f, "w1,w2,control_index,active\n");
    for (long s = 0; s < mca.num_states(); ++s) {
        const Eigen::Vector2d w = mca.coords(s);
        for (std::size_t j = 0; j < mca.jumps.size(); ++j)
            std::fprintf(f, "%.6f,%.6f,%d,%d\n", w[0], w[1], mca.jumps[j].control_index,
                         sol.is_active(mca, s, j) ? 1 : 0);
    }
    std::fclose(f);
}

}  // namespace sct
