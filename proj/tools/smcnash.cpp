#include <smcnash/smcnash.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace smcnash;

namespace {

struct ModelFlags {
    std::string model = "aloha"; // aloha | csmaca | path to a model file
    unsigned nodes = 2;
    unsigned coalition = 0;
    std::string grid;
    std::int64_t time_bound = -1;   // -1: model default
    std::int64_t energy_bound = -1;
    std::int64_t offset_max = -1;
    std::int64_t slot_len = -1;
    std::int64_t slot_jitter = -1;
    std::int64_t frame_time = -1;
    std::int64_t frames = -1;

    void attach(CLI::App* cmd, bool game_only) {
        cmd->add_option("--model", model,
                        game_only ? "bundled model: aloha or csmaca"
                                  : "bundled model (aloha, csmaca) or a model file path")
            ->capture_default_str();
        cmd->add_option("--nodes", nodes, "number of player nodes")->capture_default_str();
        cmd->add_option("--coalition", coalition,
                        "coalition size (csmaca only; 0 = no coalitions)")
            ->capture_default_str();
        cmd->add_option("--grid", grid,
                        "strategy grid: comma list (0,5,10) or start:step:stop (0.05:0.05:1)");
        cmd->add_option("--time-bound", time_bound, "goal time bound override");
        cmd->add_option("--energy-bound", energy_bound, "goal energy bound override");
        cmd->add_option("--offset-max", offset_max, "initial random offset bound override");
        cmd->add_option("--slot-len", slot_len, "aloha decision slot bound override");
        cmd->add_option("--slot-jitter", slot_jitter, "aloha slot jitter override");
        cmd->add_option("--frame-time", frame_time, "aloha frame transmission time override");
        cmd->add_option("--frames", frames, "aloha frames to send (0 = saturated)");
    }
};

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a, b, c;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &c) != 3 || b <= 0)
            throw ConfigError("bad grid spec: " + spec);
        for (int i = 0;; ++i) {
            double v = std::round((a + b * i) * 1e9) / 1e9; // snap accumulated error
            if (v > c + 1e-12) break;
            out.push_back(v);
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string item = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!item.empty()) out.push_back(std::stod(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty grid spec");
    return out;
}

bool is_bundled(const std::string& m) { return m == "aloha" || m == "csmaca"; }

GameConfig make_game(const ModelFlags& mf) {
    if (mf.model == "aloha") {
        AlohaParams p;
        if (mf.time_bound > 0) p.time_bound = mf.time_bound;
        if (mf.energy_bound > 0) p.energy_bound = mf.energy_bound;
        if (mf.offset_max > 0) p.initial_offset_max = mf.offset_max;
        if (mf.slot_len > 0) p.slot_len = mf.slot_len;
        if (mf.slot_jitter >= 0) p.slot_jitter = mf.slot_jitter;
        if (mf.frame_time > 0) p.frame_tx_time = mf.frame_time;
        if (mf.frames >= 0) p.frames_to_send = mf.frames;
        StrategySpace grid = aloha_grid();
        if (!mf.grid.empty()) grid.values = parse_grid(mf.grid);
        if (mf.coalition > 0) throw ConfigError("coalitions are a csmaca feature");
        return build_aloha(mf.nodes, p, grid);
    }
    if (mf.model == "csmaca") {
        CsmaCaParams p;
        if (mf.time_bound > 0) p.time_bound = mf.time_bound;
        if (mf.energy_bound > 0) p.energy_bound = mf.energy_bound;
        if (mf.offset_max > 0) p.initial_offset_max = mf.offset_max;
        StrategySpace grid = csma_grid();
        if (!mf.grid.empty()) grid.values = parse_grid(mf.grid);
        return build_csma_ca(mf.nodes, p, grid, mf.coalition);
    }
    throw ConfigError("game analysis needs a bundled model (aloha or csmaca); '" + mf.model +
                      "' is not one. Model files cover validate/simulate.");
}

// A concrete network for validate/simulate: bundled instance or file.
Network make_network(const ModelFlags& mf, double strategy, std::string* goal_out) {
    if (mf.model == "aloha") {
        AlohaParams p;
        if (mf.time_bound > 0) p.time_bound = mf.time_bound;
        if (mf.energy_bound > 0) p.energy_bound = mf.energy_bound;
        if (mf.offset_max > 0) p.initial_offset_max = mf.offset_max;
        if (mf.slot_len > 0) p.slot_len = mf.slot_len;
        if (mf.slot_jitter >= 0) p.slot_jitter = mf.slot_jitter;
        if (mf.frame_time > 0) p.frame_tx_time = mf.frame_time;
        if (mf.frames >= 0) p.frames_to_send = mf.frames;
        if (goal_out) *goal_out = aloha_goal(p);
        return build_aloha_network(std::vector<double>(mf.nodes, strategy <= 0 ? 0.5 : strategy), p);
    }
    if (mf.model == "csmaca") {
        CsmaCaParams p;
        if (mf.time_bound > 0) p.time_bound = mf.time_bound;
        if (mf.energy_bound > 0) p.energy_bound = mf.energy_bound;
        if (mf.offset_max > 0) p.initial_offset_max = mf.offset_max;
        if (goal_out) *goal_out = csma_goal(p);
        return build_csma_network(
            std::vector<std::int64_t>(mf.nodes, strategy < 0 ? p.unit_backoff
                                                             : static_cast<std::int64_t>(strategy)),
            p);
    }
    if (goal_out) goal_out->clear();
    return load_network(mf.model);
}

void print_report(const AnalysisReport& r) {
    std::cout << "model            " << r.model << " (" << r.players << " nodes";
    if (r.coalition_size) std::cout << ", coalitions of " << r.coalition_size;
    std::cout << ")\n";
    std::cout << "goal             " << r.goal << "\n";
    std::cout << "pairs estimated  " << r.pairs_estimated << " of "
              << r.grid.size() * r.grid.size() << "\n";
    if (r.candidate) {
        std::cout << "NE candidate     " << r.grid.label << " = " << *r.candidate
                  << "  (worst ratio " << r.candidate_worst_ratio << ")\n";
        if (r.certification) {
            std::cout << "certified delta  " << r.certification->delta
                      << (r.certification->capped ? "  (capped)" : "") << "  [f(delta) = "
                      << r.certification->f_at_delta << ", alpha = " << r.alpha << "]\n";
        } else {
            std::cout << "certified delta  unavailable: " << r.certification_error << "\n";
        }
        if (!r.evaluation.empty()) {
            std::size_t ci = r.grid.index_of(*r.candidate);
            std::cout << "U(cand, cand)    " << r.evaluation[ci].estimate() << " at n2 = " << r.n2
                      << "\n";
        }
    } else {
        std::cout << "NE candidate     none; " << r.no_candidate_hint << "\n";
    }
    std::cout << "sym. optimum     " << r.grid.label << " = " << r.p_opt << "  (U = "
              << r.p_opt_utility << " at n1 = " << r.n1 << ")\n";
    std::cout << "wall time        " << r.wall_seconds << " s\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Nash equilibrium search and statistical certification for stochastic "
                 "timed-automata protocol games"};
    app.require_subcommand(1);

    // shared knobs
    std::uint64_t seed = 1;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string cache_path, out_path;

    auto add_common = [&](CLI::App* cmd, bool with_cache = true) {
        cmd->add_option("--seed", seed, "base RNG seed")->capture_default_str();
        cmd->add_option("--workers", workers, "worker threads")->capture_default_str();
        if (with_cache) cmd->add_option("--cache", cache_path, "persistent estimation cache file");
        cmd->add_option("--out", out_path, "output file");
    };

    // ---- validate ----
    ModelFlags vf;
    auto* cmd_validate = app.add_subcommand("validate", "structural checks on a model");
    vf.attach(cmd_validate, false);

    // ---- simulate ----
    ModelFlags sf;
    unsigned sim_runs = 10;
    double sim_strategy = -1;
    std::string sim_formula, trace_path;
    std::size_t sim_max_steps = 1'000'000;
    auto* cmd_sim = app.add_subcommand("simulate", "run random simulations and report verdicts");
    sf.attach(cmd_sim, false);
    cmd_sim->add_option("--runs", sim_runs, "number of simulations")->capture_default_str();
    cmd_sim->add_option("--strategy", sim_strategy, "common strategy value for bundled models");
    cmd_sim->add_option("--formula", sim_formula, "goal formula (default: the model's goal)");
    cmd_sim->add_option("--trace", trace_path, "dump the first run as a trace file");
    cmd_sim->add_option("--max-steps", sim_max_steps, "per-run step cap")->capture_default_str();
    add_common(cmd_sim, false);

    // ---- estimate ----
    ModelFlags ef;
    double est_pd = 0.5, est_pc = 0.5;
    std::uint32_t est_n = 10'000;
    auto* cmd_est = app.add_subcommand("estimate", "Monte-Carlo utility of one strategy pair");
    ef.attach(cmd_est, true);
    cmd_est->add_option("--p-deviant", est_pd, "player 0 strategy")->required();
    cmd_est->add_option("--p-common", est_pc, "common strategy of the others")->required();
    cmd_est->add_option("--n", est_n, "simulation count")->capture_default_str();
    add_common(cmd_est);

    // ---- search ----
    ModelFlags rf;
    double s_d = 0.9;
    std::uint32_t s_n1 = 10'000;
    auto* cmd_search = app.add_subcommand("search", "phase 1: best NE candidate with pruning");
    rf.attach(cmd_search, true);
    cmd_search->add_option("--d", s_d, "pruning threshold in [0,1]")->capture_default_str();
    cmd_search->add_option("--n1", s_n1, "simulations per pair")->capture_default_str();
    add_common(cmd_search);

    // ---- evaluate ----
    ModelFlags xf;
    double e_candidate = 0.0, e_alpha = 0.05;
    std::uint32_t e_n2 = 100'000;
    auto* cmd_eval = app.add_subcommand("evaluate", "phase 2: certify a candidate's delta");
    xf.attach(cmd_eval, true);
    cmd_eval->add_option("--candidate", e_candidate, "candidate strategy value")->required();
    cmd_eval->add_option("--n2", e_n2, "simulations per pair")->capture_default_str();
    cmd_eval->add_option("--alpha", e_alpha, "significance level")->capture_default_str();
    add_common(cmd_eval);

    // ---- analyze ----
    ModelFlags af;
    PipelineOptions popt;
    auto* cmd_analyze = app.add_subcommand("analyze", "full two-phase pipeline");
    af.attach(cmd_analyze, true);
    cmd_analyze->add_option("--d", popt.d, "pruning threshold")->capture_default_str();
    cmd_analyze->add_option("--n1", popt.n1, "phase-1 simulations per pair")->capture_default_str();
    cmd_analyze->add_option("--n2", popt.n2, "phase-2 simulations per pair")->capture_default_str();
    cmd_analyze->add_option("--alpha", popt.alpha, "significance level")->capture_default_str();
    add_common(cmd_analyze);

    // ---- validity ----
    double v_delta = 1.0, v_alpha = 0.05;
    std::size_t v_strategies = 100;
    std::uint32_t v_n = 100'000, v_trials = 200;
    auto* cmd_validity =
        app.add_subcommand("validity", "synthetic check of the certification method");
    cmd_validity->add_option("--true-delta", v_delta, "true relaxation of the synthetic model")
        ->capture_default_str();
    cmd_validity->add_option("--strategies", v_strategies, "strategy count")->capture_default_str();
    cmd_validity->add_option("--n", v_n, "simulations per estimate")->capture_default_str();
    cmd_validity->add_option("--trials", v_trials, "experiment repetitions")->capture_default_str();
    cmd_validity->add_option("--alpha", v_alpha, "significance level")->capture_default_str();
    add_common(cmd_validity, false);

    // ---- export-surface ----
    std::string surf_cache;
    std::string surf_phase = "search";
    auto* cmd_surface = app.add_subcommand("export-surface", "dump a cached utility surface as CSV");
    cmd_surface->add_option("--cache", surf_cache, "estimation cache file")->required();
    cmd_surface->add_option("--phase", surf_phase, "search or evaluate")->capture_default_str();
    cmd_surface->add_option("--out", out_path, "output CSV (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    if (cmd_validate->parsed()) {
        Network net = make_network(vf, -1, nullptr);
        auto diags = validate(net);
        for (const std::string& d : diags) std::cout << "diagnostic: " << d << "\n";
        std::cout << (diags.empty() ? "ok" : "invalid") << "\n";
        return diags.empty() ? 0 : 1;
    }

    if (cmd_sim->parsed()) {
        std::string goal;
        Network net = make_network(sf, sim_strategy, &goal);
        if (!sim_formula.empty()) goal = sim_formula;
        if (goal.empty())
            throw ConfigError("this model has no default goal; pass --formula");
        PwctlFormula f = PwctlFormula::parse(goal);
        f.resolve(net);
        Simulator sim(net);
        SimOptions so;
        so.max_steps = sim_max_steps;
        unsigned sat = 0, vio = 0, trunc = 0;
        for (unsigned i = 0; i < sim_runs; ++i) {
            so.record = !trace_path.empty() && i == 0;
            RngStream rng(seed, i);
            PwctlMonitor mon(net, f);
            Run run = sim.simulate(mon, rng, so);
            if (so.record) write_text_file(trace_path, write_trace(net, run));
            if (run.outcome == Run::Outcome::Satisfied) ++sat;
            else if (run.outcome == Run::Outcome::Violated) ++vio;
            else ++trunc;
        }
        std::cout << "formula    " << goal << "\n";
        std::cout << "satisfied  " << sat << "\nviolated   " << vio << "\ntruncated  " << trunc
                  << "\nof         " << sim_runs << " runs (seed " << seed << ")\n";
        return 0;
    }

    if (cmd_est->parsed()) {
        GameConfig cfg = make_game(ef);
        WorkerPool pool(workers);
        EstimateOptions eo;
        eo.pool = &pool;
        UtilityEstimate e =
            estimate_utility(cfg, est_pd, est_pc, est_n, seed, domain::kAdhoc, eo);
        std::cout << "U(" << est_pd << ", " << est_pc << ") ~= " << e.estimate() << "  (k = " << e.k
                  << " of n = " << e.n << ", " << e.truncations << " truncated)\n";
        return 0;
    }

    if (cmd_search->parsed()) {
        GameConfig cfg = make_game(rf);
        WorkerPool pool(workers);
        EstimationCache cache(cfg.fingerprint(), seed);
        if (!cache_path.empty()) cache.attach_file(cache_path);
        EstimateOptions eo;
        eo.pool = &pool;
        CachedEstimator oracle(cfg, cache, s_n1, domain::kSearch, eo);
        RngStream decisions(seed, domain::kSearchDecisions);
        auto t0 = std::chrono::steady_clock::now();
        SearchReport rep = find_candidate(cfg.strategies, oracle, s_d, decisions);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "pairs estimated  " << rep.pairs_estimated << " of "
                  << cfg.strategies.size() * cfg.strategies.size() << "\n";
        if (!rep.result) {
            std::cout << "no candidate survived pruning at d = " << s_d << "; retry with d = "
                      << s_d / 2 << " (the cache is reused)\n";
            return 2;
        }
        std::cout << "candidate        " << cfg.strategies.label << " = " << rep.result->value
                  << "\nworst ratio      " << rep.result->worst_ratio << "\n";
        std::cout << "candidate ratios:\n";
        for (const auto& [idx, ratio] : rep.result->candidate_ratios)
            std::cout << "  " << cfg.strategies.values[idx] << "  ->  " << ratio << "\n";
        std::cout << "wall time        " << wall << " s\n";
        return 0;
    }

    if (cmd_eval->parsed()) {
        GameConfig cfg = make_game(xf);
        WorkerPool pool(workers);
        EstimationCache cache(cfg.fingerprint(), seed);
        if (!cache_path.empty()) cache.attach_file(cache_path);
        EstimateOptions eo;
        eo.pool = &pool;
        CachedEstimator fresh(cfg, cache, e_n2, domain::kEvaluate, eo);
        std::size_t ci = cfg.strategies.index_of(e_candidate);
        EvaluationInput in;
        in.candidate = e_candidate;
        in.n = e_n2;
        in.alpha = e_alpha;
        for (std::size_t i = 0; i < cfg.strategies.size(); ++i) {
            UtilityEstimate e = fresh(i, ci);
            in.deviations.emplace_back(cfg.strategies.values[i], e.estimate());
            if (i == ci) in.diag = e.estimate();
        }
        try {
            EvaluationResult res = certify_delta(in);
            std::cout << "certified delta  " << res.delta << (res.capped ? " (capped)" : "")
                      << "\nbracket          [" << res.delta << ", " << res.delta_hi << "]"
                      << "\nf(delta)         " << res.f_at_delta << "  (alpha = " << e_alpha
                      << ")\n";
            std::cout << "per-strategy terms:\n";
            for (std::size_t i = 0; i < in.deviations.size(); ++i)
                std::cout << "  " << in.deviations[i].first << "  U = " << in.deviations[i].second
                          << "  term = " << res.terms[i] << "\n";
            return 0;
        } catch (const InsufficientSimulations& ex) {
            std::cout << "certification impossible: " << ex.what() << "\n";
            return 3;
        }
    }

    if (cmd_analyze->parsed()) {
        GameConfig cfg = make_game(af);
        popt.seed = seed;
        popt.workers = workers;
        popt.cache_path = cache_path;
        AnalysisReport rep = run_pipeline(cfg, popt);
        print_report(rep);
        if (!out_path.empty()) write_text_file(out_path, report_to_json(rep).dump(2) + "\n");
        if (!rep.candidate) return 2;
        if (!rep.certification_error.empty()) return 3;
        return 0;
    }

    if (cmd_validity->parsed()) {
        WorkerPool pool(workers);
        ValidityStats stats =
            validity_experiment(v_delta, v_strategies, v_n, v_trials, seed, v_alpha, &pool);
        std::cout << "trials       " << stats.trials << "\nmean delta   " << stats.mean
                  << "\ntrue delta   " << stats.true_delta << "\nexceedance   " << stats.exceedance
                  << "  (alpha = " << v_alpha << ")\n";
        if (!out_path.empty()) write_text_file(out_path, validity_histogram_csv(stats));
        return 0;
    }

    if (cmd_surface->parsed()) {
        std::ifstream in(surf_cache);
        if (!in) throw ConfigError("cannot open cache file: " + surf_cache);
        std::uint64_t want = surf_phase == "evaluate" ? domain::kEvaluate : domain::kSearch;
        std::ostringstream os;
        os << "p_deviant,p_common,k,n,estimate\n";
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("pair ", 0) != 0) continue;
            auto kv = detail::parse_kv_line(line);
            if (std::stoull(kv.at("domain")) != want) continue;
            double k = std::stod(kv.at("k")), n = std::stod(kv.at("n"));
            os << kv.at("pd") << "," << kv.at("pc") << "," << kv.at("k") << "," << kv.at("n")
               << "," << detail::fmt_double(n > 0 ? k / n : 0.0) << "\n";
        }
        if (out_path.empty())
            std::cout << os.str();
        else
            write_text_file(out_path, os.str());
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
