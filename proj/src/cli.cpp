#include "sct/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "sct/analytic1d.hpp"
#include "sct/diffusion_sim.hpp"
#include "sct/errors.hpp"
#include "sct/io.hpp"
#include "sct/mca.hpp"
#include "sct/mdp.hpp"
#include "sct/nn/policy.hpp"
#include "sct/nn/solver.hpp"
#include "sct/queue_sim.hpp"

namespace sct::cli {

namespace fs = std::filesystem;

namespace {

ControlProblem problem_from_config(const json& cfg) {
    if (!cfg.contains("problem")) throw ConfigInvalid("config needs a 'problem' block");
    const auto& p = cfg.at("problem");
    const std::string name = p.at("name");
    ControlProblem pr = make_example(name, p.value("d", p.value("case_index", 0)),
                                     p.value("case", std::string{}));
    if (name == "threestation" && p.value("reduced", true))
        pr = make_threestation_reduced(p.value("case_index", p.value("d", 1)));
    if (p.contains("b")) pr.b = p.at("b").get<double>();
    return pr;
}

nn::SolverConfig solver_config_from(const ControlProblem& pr, const json& cfg) {
    nn::SolverConfig sc = nn::SolverConfig::from_problem(pr);
    if (!cfg.contains("solver")) return sc;
    const auto& s = cfg.at("solver");
    sc.iterations = s.value("iterations", sc.iterations);
    sc.epochs = s.value("epochs", sc.epochs);
    sc.neurons = s.value("neurons", sc.neurons);
    sc.batch = s.value("batch", sc.batch);
    sc.num_steps = s.value("num_steps", sc.num_steps);
    sc.T = s.value("T", sc.T);
    sc.shape_weight = s.value("shape_weight", sc.shape_weight);
    sc.seed = s.value("seed", sc.seed);
    return sc;
}

QueueModel queue_model_from(const json& cfg) {
    const auto& p = cfg.at("problem");
    const std::string name = p.at("name");
    if (name == "tandem") return make_tandem_queue_model();
    if (name == "crisscross")
        return make_crisscross_queue_model(parse_criss_case(p.at("case").get<std::string>()));
    if (name == "manyqueues") return make_chain6_queue_model();
    if (name == "mm1")
        return make_mm1_model(p.value("lambda", 0.5), p.value("m", 1.0), p.value("h", 1.0),
                              p.value("r", 0.01));
    throw ConfigInvalid("no queueing model for problem: " + name);
}

GradientFn gradient_from_checkpoint(const std::string& path) {
    auto net = std::make_shared<nn::Mlp>(nn::Mlp::load(path));
    return [net](const Eigen::VectorXd& w) { return net->forward_vec(w); };
}

struct Runner {
    Options opts;
    json config;
    fs::path outdir;
    std::vector<std::string> artifacts;
    json result;

    std::string artifact(const std::string& name) {
        artifacts.push_back(name);
        return (outdir / name).string();
    }

    uint64_t sim_seed() const {
        if (opts.seed_override >= 0) return static_cast<uint64_t>(opts.seed_override);
        if (config.contains("simulation") && config.at("simulation").contains("seed"))
            return config.at("simulation").at("seed").get<uint64_t>();
        return config.value("seed", 1ull);
    }

    void run_solve_1d() {
        const auto& s = config.at("solver");
        const double h = s.at("h"), a = s.at("a"), c = s.at("c"), r = s.at("r");
        const OneDSolution sol = solve_singular_1d(h, a, c, r);
        result["w_star"] = sol.w_star;
        result["C"] = sol.C;
        result["V0_singular"] = sol.value(0.0);
        if (s.contains("b")) {
            const auto drift = solve_drift_1d(h, a, c, r, s.at("b").get<double>(),
                                              s.value("mesh", 2e-4));
            result["threshold"] = drift.threshold;
            result["V0"] = drift.v0;
        }
    }

    void run_solve_nn() {
        const ControlProblem pr = problem_from_config(config);
        nn::SolverConfig sc = solver_config_from(pr, config);
        if (opts.seed_override >= 0) sc.seed = static_cast<uint64_t>(opts.seed_override);
        const nn::TrainResult trained = nn::train(pr, sc);
        trained.v_net.save(artifact("v_net.sctw"));
        trained.g_net.save(artifact("g_net.sctw"));
        result["final_loss"] = trained.loss_history.back();
        result["initial_loss"] = trained.loss_history.front();
        result["iterations"] = static_cast<long>(trained.loss_history.size());
        if (config.contains("heatmap")) {
            const auto& hm = config.at("heatmap");
            const auto policy = nn::extract_policy(trained.g_net, pr);
            nn::export_heatmap_csv(artifact("heatmap.csv"), policy, hm.value("w1_max", 3.0),
                                   hm.value("w2_max", 3.0), hm.value("n1", 100),
                                   hm.value("n2", 100));
        }
    }

    void run_solve_mdp() {
        const auto& p = config.at("problem");
        const std::string name = p.at("name");
        const auto& s = config.value("solver", json::object());
        const double eps = s.value("eps", 0.1);
        if (name == "tandem") {
            const TandemMdp mdp = build_tandem_mdp(0.95, 1.0, {1.0, 2.0}, 0.01,
                                                   s.value("cap", 1000));
            const MdpResult res = value_iteration(mdp, eps);
            save_values_binary(artifact("values.sctv"), res.value);
            export_tandem_policy_csv(artifact("policy.csv"), mdp, res.policy,
                                     std::min(mdp.cap, s.value("export_max", 100)));
            result["v0"] = res.value[mdp.index(0, 0)];
            result["sweeps"] = res.sweeps;
        } else if (name == "crisscross") {
            const CrissCrossMdp mdp =
                build_crisscross_mdp(parse_criss_case(p.at("case").get<std::string>()),
                                     s.value("cap", 300));
            const MdpResult res = value_iteration(mdp, eps);
            save_values_binary(artifact("values.sctv"), res.value);
            export_crisscross_policy_slice(artifact("policy_q1_0.csv"), mdp, res.policy, 0,
                                           std::min(mdp.cap, s.value("export_max", 100)));
            result["v0"] = res.value[mdp.index(0, 0, 0)];
            result["sweeps"] = res.sweeps;
        } else {
            throw ConfigInvalid("solve-mdp supports tandem and crisscross");
        }
    }

    void run_solve_mca() {
        const auto& p = config.at("problem");
        const ControlProblem pr =
            make_threestation_reduced(p.value("case_index", 1));
        const auto& s = config.value("solver", json::object());
        McaGrid grid;
        grid.h1 = s.value("h1", 0.1);
        grid.h2 = s.value("h2", 0.108);
        grid.n1 = s.value("n1", 400);
        grid.n2 = s.value("n2", 400);
        const McaProblem mca = build_mca(pr, grid);
        const McaSolution sol = mca_solve(
            mca, s.value("eps", 1e-8),
            s.value("method", std::string("policy")) == "value" ? McaMethod::value_iteration
                                                                : McaMethod::policy_iteration);
        export_mca_labels_csv(artifact("labels.csv"), mca, sol);
        result["v0"] = sol.value[mca.state_at(0, 0)];
        result["iterations"] = sol.iterations;
        result["states"] = mca.num_states();
    }

    void run_simulate_queue() {
        const QueueModel model = queue_model_from(config);
        const auto& sim = config.at("simulation");
        const auto& pol = sim.at("policy");
        const std::string type = pol.at("type");

        std::unique_ptr<SchedulingPolicy> policy;
        if (type == "never-idle") {
            policy = never_idle_policy();
        } else if (type == "static-priority") {
            std::vector<int> order = pol.value("order", std::vector<int>{0, 1, 2});
            policy = static_priority_policy(order);
        } else if (type == "mdp") {
            if (model.k == 2) {
                const TandemMdp mdp =
                    build_tandem_mdp(0.95, 1.0, {1.0, 2.0}, 0.01, pol.value("cap", 200));
                policy = tandem_mdp_policy(mdp, value_iteration(mdp, pol.value("eps", 0.1)).policy);
            } else {
                const CrissCrossMdp mdp = build_crisscross_mdp(
                    parse_criss_case(config.at("problem").at("case").get<std::string>()),
                    pol.value("cap", 60));
                policy =
                    crisscross_mdp_policy(mdp, value_iteration(mdp, pol.value("eps", 0.1)).policy);
            }
        } else if (type == "diffusion") {
            const std::string ckpt = pol.at("g_net");
            if (!fs::exists(ckpt)) throw ArtifactMissing("gradient checkpoint missing: " + ckpt);
            auto g = gradient_from_checkpoint(ckpt);
            if (model.k == 2)
                policy = diffusion_tandem_policy(g, model.n_scale);
            else if (model.k == 3)
                policy = diffusion_crisscross_policy(g, model.n_scale, pol.value("s", 2));
            else
                policy = diffusion_chain_policy(g, model.n_scale);
        } else if (type == "lbp") {
            const auto betas = pol.at("beta").get<std::vector<double>>();
            policy = linear_boundary_policy(
                Eigen::Map<const Eigen::VectorXd>(betas.data(), betas.size()), model.n_scale);
        } else {
            throw ConfigInvalid("unknown policy type: " + type);
        }

        const CostEstimate est =
            simulate_discounted(model, *policy, sim.value("horizon", 1400.0),
                                sim.value("reps", 10000L), sim_seed(), opts.workers);
        result["estimate"] = to_json(est);
        result["policy"] = policy->name();
        if (sim.value("export_lattice", false))
            export_decision_lattice_csv(artifact("lattice.csv"), model, *policy,
                                        sim.value("lattice_max", 60),
                                        sim.value("lattice_q3", 0));
    }

    void run_simulate_diffusion() {
        const ControlProblem pr = problem_from_config(config);
        const auto& sim = config.at("simulation");
        DiffusionSimConfig dc;
        dc.dt = sim.value("dt", 1e-4);
        dc.reps = sim.value("reps", 10000L);
        dc.horizon = sim.value("horizon", 0.0);
        dc.seed = sim_seed();
        dc.workers = opts.workers;
        if (sim.contains("unit_step")) {
            const auto us = sim.at("unit_step").get<std::vector<double>>();
            dc.unit_step = Eigen::Map<const Eigen::VectorXd>(us.data(), us.size());
        }

        const auto& pol = sim.at("policy");
        const std::string type = pol.at("type");
        RegionFn region;
        if (type == "none") {
            region = no_control_region(pr.p);
        } else if (type == "threshold") {
            region = threshold_region(pr, pol.at("threshold").get<double>());
        } else if (type == "nn") {
            const std::string ckpt = pol.at("g_net");
            if (!fs::exists(ckpt)) throw ArtifactMissing("gradient checkpoint missing: " + ckpt);
            auto policy = std::make_shared<nn::GradientPolicy>(
                nn::extract_policy(nn::Mlp::load(ckpt), pr));
            region = [policy](const VectorXd& w, std::vector<bool>& active) {
                active = policy->active(w);
            };
            if (pr.d == 2)
                region = make_grid_cached_region(region, pr.p, pol.value("cache_w1", 60.0),
                                                 pol.value("cache_w2", 60.0), 600, 600);
        } else {
            throw ConfigInvalid("unknown diffusion policy type: " + type);
        }

        const DiffusionRunResult run = simulate_policy_value(pr, region, dc);
        result["estimate"] = to_json(run.estimate);
    }

    void run_tune_lbp() {
        const QueueModel model = queue_model_from(config);
        const auto& sim = config.at("simulation");
        const LbpSearchResult search =
            lbp_grid_search(model, sim.value("horizon", 1400.0), sim.value("reps", 1000L),
                            sim_seed(), opts.workers);
        result["beta"] = std::vector<double>(search.beta.data(),
                                             search.beta.data() + search.beta.size());
        auto stages = json::array();
        for (const auto& st : search.stages)
            stages.push_back({{"pair_first", st.pair_first},
                              {"candidates", st.candidates},
                              {"best_cost", st.best_cost}});
        result["stages"] = stages;
    }

    void run_compare() {
        const auto& c = config.at("compare");
        const std::string a = c.at("a"), b = c.at("b");
        if (!fs::exists(a) || !fs::exists(b))
            throw ArtifactMissing("compare requires both label files");
        const AgreementResult agree = compare_label_csvs(a, b);
        result["compared"] = agree.compared;
        result["matched"] = agree.matched;
        result["agreement"] = agree.fraction();
    }

    void run_export_heatmap() {
        const ControlProblem pr = problem_from_config(config);
        const auto& hm = config.at("heatmap");
        const std::string ckpt = hm.at("g_net");
        if (!fs::exists(ckpt)) throw ArtifactMissing("gradient checkpoint missing: " + ckpt);
        const auto policy = nn::extract_policy(nn::Mlp::load(ckpt), pr);
        nn::export_heatmap_csv(artifact("heatmap.csv"), policy, hm.value("w1_max", 3.0),
                               hm.value("w2_max", 3.0), hm.value("n1", 100),
                               hm.value("n2", 100));
        result["rows"] = (hm.value("n1", 100) + 1) *
                         (pr.d >= 2 ? hm.value("n2", 100) + 1 : 1) * pr.p;
    }
};

}  // namespace

int run(const Options& opts) {
    Runner runner;
    runner.opts = opts;

    try {
        runner.config = read_json(opts.config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const char* root_env = std::getenv("SCT_OUT_ROOT");
    fs::path root = root_env ? fs::path(root_env) : fs::path(".");
    fs::path dir = !opts.out_override.empty()
                       ? fs::path(opts.out_override)
                       : fs::path(runner.config.value("output_dir", std::string(".")));
    runner.outdir = dir.is_absolute() ? dir : root / dir;
    std::error_code ec;
    fs::create_directories(runner.outdir, ec);

    try {
        const std::string& sub = opts.subcommand;
        if (sub == "solve-1d") runner.run_solve_1d();
        else if (sub == "solve-nn") runner.run_solve_nn();
        else if (sub == "solve-mdp") runner.run_solve_mdp();
        else if (sub == "solve-mca") runner.run_solve_mca();
        else if (sub == "simulate-queue") runner.run_simulate_queue();
        else if (sub == "simulate-diffusion") runner.run_simulate_diffusion();
        else if (sub == "tune-lbp") runner.run_tune_lbp();
        else if (sub == "compare") runner.run_compare();
        else if (sub == "export-heatmap") runner.run_export_heatmap();
        else throw ConfigInvalid("unknown subcommand: " + sub);

        const std::string result_path = (runner.outdir / "result.json").string();
        write_json(result_path, runner.result);
        runner.artifacts.push_back("result.json");
        write_manifest((runner.outdir / "manifest.json").string(), opts.subcommand, runner.config,
                       runner.sim_seed(), opts.workers, runner.artifacts);
        return 0;
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["subcommand"] = opts.subcommand;
        write_json((runner.outdir / "error.json").string(), err);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sct::cli
