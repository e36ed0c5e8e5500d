#include "sct/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "sct/errors.hpp"

namespace sct {

TandemMdp build_tandem_mdp(double lambda, double m, Eigen::Vector2d h, double r, int cap) {
    if (!(lambda * m < 1.0)) throw ConfigInvalid("tandem MDP requires lambda * m < 1");
    if (cap < 1) throw ConfigInvalid("cap must be >= 1");
    TandemMdp mdp;
    mdp.lambda = lambda;
    mdp.m = m;
    mdp.h = h;
    mdp.r = r;
    mdp.cap = cap;
    return mdp;
}

CrissCrossMdp build_crisscross_mdp(CrissCase holding_case, int cap) {
    if (cap < 1) throw ConfigInvalid("cap must be >= 1");
    CrissCrossMdp mdp;
    mdp.cap = cap;
    switch (holding_case) {
        case CrissCase::IIA: mdp.h = {1.0, 1.0, 1.0}; break;
        case CrissCase::IIB: mdp.h = {1.0, 1.0, 1.5}; break;
        case CrissCase::IIC: mdp.h = {1.5, 1.0, 1.0}; break;
        case CrissCase::IID: mdp.h = {1.5, 1.0, 1.5}; break;
    }
    return mdp;
}

namespace {

struct SweepOutcome {
    double sup_diff = 0.0;
};

// One Jacobi sweep of the tandem Bellman operator; writes values and greedy
// actions into the out buffers.
SweepOutcome tandem_sweep(const TandemMdp& mdp, const std::vector<double>& v,
                          std::vector<double>& v_next, std::vector<uint8_t>* actions) {
    const double Lambda = mdp.uniformization_rate();
    const double beta = Lambda / (Lambda + mdp.r);
    const double mu = 1.0 / mdp.m;
    const int cap = mdp.cap;
    double sup = 0.0;

#pragma omp parallel for schedule(static) reduction(max : sup)
    for (int q1 = 0; q1 <= cap; ++q1) {
        for (int q2 = 0; q2 <= cap; ++q2) {
            const long s = mdp.index(q1, q2);
            const double cost = (mdp.h[0] * q1 + mdp.h[1] * q2) / (Lambda + mdp.r);
            const double v_self = v[s];
            const double v_arr = (q1 < cap) ? v[mdp.index(q1 + 1, q2)] : v_self;
            // Station-1 completion is blocked when buffer 2 is at the cap.
            const double v_s1 = (q1 > 0 && q2 < cap) ? v[mdp.index(q1 - 1, q2 + 1)] : v_self;
            const double v_s2 = (q2 > 0) ? v[mdp.index(q1, q2 - 1)] : v_self;

            double best = std::numeric_limits<double>::infinity();
            uint8_t best_a = 0;
            for (uint8_t a = 0; a < 4; ++a) {
                const bool serve1 = a & 1, serve2 = a & 2;
                if (serve1 && q1 == 0) continue;
                if (serve2 && q2 == 0) continue;
                double ev = mdp.lambda * v_arr;
                double used = mdp.lambda;
                if (serve1) { ev += mu * v_s1; used += mu; }
                if (serve2) { ev += mu * v_s2; used += mu; }
                ev += (Lambda - used) * v_self;
                const double q_val = cost + beta * (ev / Lambda);
                if (q_val < best - 1e-14) {
                    best = q_val;
                    best_a = a;
                }
            }
            v_next[s] = best;
            if (actions) (*actions)[s] = best_a;
            sup = std::max(sup, std::abs(best - v_self));
        }
    }
    return {sup};
}

SweepOutcome crisscross_sweep(const CrissCrossMdp& mdp, const std::vector<double>& v,
                              std::vector<double>& v_next, std::vector<uint8_t>* actions) {
    const double Lambda = mdp.uniformization_rate();
    const double beta = Lambda / (Lambda + mdp.r);
    const double mu1 = 1.0 / mdp.m1, mu2 = 1.0 / mdp.m2, mu3 = 1.0 / mdp.m3;
    const int cap = mdp.cap;
    double sup = 0.0;

#pragma omp parallel for schedule(static) reduction(max : sup)
    for (int q1 = 0; q1 <= cap; ++q1) {
        for (int q2 = 0; q2 <= cap; ++q2) {
            for (int q3 = 0; q3 <= cap; ++q3) {
                const long s = mdp.index(q1, q2, q3);
                const double cost =
                    (mdp.h[0] * q1 + mdp.h[1] * q2 + mdp.h[2] * q3) / (Lambda + mdp.r);
                const double v_self = v[s];
                const double v_a1 = (q1 < cap) ? v[mdp.index(q1 + 1, q2, q3)] : v_self;
                const double v_a2 = (q2 < cap) ? v[mdp.index(q1, q2 + 1, q3)] : v_self;
                const double v_c1 = (q1 > 0) ? v[mdp.index(q1 - 1, q2, q3)] : v_self;
                const double v_c2 =
                    (q2 > 0 && q3 < cap) ? v[mdp.index(q1, q2 - 1, q3 + 1)] : v_self;
                const double v_c3 = (q3 > 0) ? v[mdp.index(q1, q2, q3 - 1)] : v_self;

                const double base = mdp.lambda1 * v_a1 + mdp.lambda2 * v_a2 +
                                    (q3 > 0 ? mu3 * v_c3 : mu3 * v_self);

                double best = std::numeric_limits<double>::infinity();
                uint8_t best_a = 0;
                for (uint8_t a = 0; a < 3; ++a) {
                    if (a == 1 && q1 == 0) continue;
                    if (a == 2 && q2 == 0) continue;
                    double ev = base;
                    double used = mdp.lambda1 + mdp.lambda2 + mu3;
                    if (a == 1) { ev += mu1 * v_c1; used += mu1; }
                    if (a == 2) { ev += mu2 * v_c2; used += mu2; }
                    ev += (Lambda - used) * v_self;
                    const double q_val = cost + beta * (ev / Lambda);
                    if (q_val < best - 1e-14) {
                        best = q_val;
                        best_a = a;
                    }
                }
                v_next[s] = best;
                if (actions) (*actions)[s] = best_a;
                sup = std::max(sup, std::abs(best - v_self));
            }
        }
    }
    return {sup};
}

SweepOutcome explicit_sweep(const ExplicitMdp& mdp, const std::vector<double>& v,
                            std::vector<double>& v_next, std::vector<uint8_t>* actions) {
    const double beta = mdp.Lambda / (mdp.Lambda + mdp.r);
    double sup = 0.0;
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        double best = std::numeric_limits<double>::infinity();
        uint8_t best_a = 0;
        for (std::size_t a = 0; a < mdp.states[s].size(); ++a) {
            const auto& act = mdp.states[s][a];
            double ev = 0.0, used = 0.0;
            for (const auto& [rate, next] : act.transitions) {
                ev += rate * v[next];
                used += rate;
            }
            ev += (mdp.Lambda - used) * v[s];
            const double q_val = act.cost_rate / (mdp.Lambda + mdp.r) + beta * (ev / mdp.Lambda);
            if (q_val < best - 1e-14) {
                best = q_val;
                best_a = static_cast<uint8_t>(a);
            }
        }
        v_next[s] = best;
        if (actions) (*actions)[s] = best_a;
        sup = std::max(sup, std::abs(best - v[s]));
    }
    return {sup};
}

template <class Model, class SweepFn>
MdpResult run_value_iteration(const Model& mdp, long num_states, double eps, int max_sweeps,
                              SweepFn sweep) {
    MdpResult result;
    result.value.assign(num_states, 0.0);
    std::vector<double> next(num_states, 0.0);
    for (int it = 0; it < max_sweeps; ++it) {
        const auto outcome = sweep(mdp, result.value, next, static_cast<std::vector<uint8_t>*>(nullptr));
        result.value.swap(next);
        result.sup_diffs.push_back(outcome.sup_diff);
        ++result.sweeps;
        if (outcome.sup_diff < eps) break;
    }
    result.policy.action.assign(num_states, 0);
    sweep(mdp, result.value, next, &result.policy.action);
    return result;
}

}  // namespace

MdpResult value_iteration(const TandemMdp& mdp, double eps, int max_sweeps) {
    return run_value_iteration(mdp, mdp.num_states(), eps, max_sweeps,
                               [](const TandemMdp& m, const std::vector<double>& v,
                                  std::vector<double>& vn, std::vector<uint8_t>* a) {
                                   return tandem_sweep(m, v, vn, a);
                               });
}

MdpResult value_iteration(const CrissCrossMdp& mdp, double eps, int max_sweeps) {
    return run_value_iteration(mdp, mdp.num_states(), eps, max_sweeps,
                               [](const CrissCrossMdp& m, const std::vector<double>& v,
                                  std::vector<double>& vn, std::vector<uint8_t>* a) {
                                   return crisscross_sweep(m, v, vn, a);
                               });
}

MdpResult value_iteration(const ExplicitMdp& mdp, double eps, int max_sweeps) {
    return run_value_iteration(mdp, static_cast<long>(mdp.states.size()), eps, max_sweeps,
                               [](const ExplicitMdp& m, const std::vector<double>& v,
                                  std::vector<double>& vn, std::vector<uint8_t>* a) {
                                   return explicit_sweep(m, v, vn, a);
                               });
}

void save_values_binary(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactMissing("cannot open value table for writing: " + path);
    const char magic[4] = {'S', 'C', 'T', 'V'};
    out.write(magic, 4);
    const uint64_t n = values.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> load_values_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactMissing("cannot open value table: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SCTV", 4) != 0) throw ConfigInvalid("bad value-table magic");
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    std::vector<double> values(n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ConfigInvalid("value table truncated");
    return values;
}

void export_crisscross_policy_slice(const std::string& path, const CrissCrossMdp& mdp,
                                    const TabularPolicy& policy, int q1_fixed, int q_max) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ArtifactMissing("cannot open policy slice output: " + path);
    std::fprintf(f, "q2,q3,action\n");
    for (int q2 = 0; q2 <= q_max; ++q2)
        for (int q3 = 0; q3 <= q_max; ++q3)
            std::fprintf(f, "%d,%d,%d\n", q2, q3,
                         static_cast<int>(policy.action[mdp.index(q1_fixed, q2, q3)]));
    std::fclose(f);
}

void export_tandem_policy_csv(const std::string& path, const TandemMdp& mdp,
                              const TabularPolicy& policy, int q_max) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ArtifactMissing("cannot open policy output: " + path);
    std::fprintf(f, "q1,q2,action\n");
    for (int q1 = 0; q1 <= q_max; ++q1)
        for (int q2 = 0; q2 <= q_max; ++q2)
            std::fprintf(f, "%d,%d,%d\n", q1, q2,
                         static_cast<int>(policy.action[mdp.index(q1, q2)]));
    std::fclose(f);
}

}  // namespace sct
