// seqstop: sequential-stopping engine for mode identification of sampled
// categorical answers.  Subcommands cover the asymptotic rate calculators,
// single posterior evaluations, the synthetic benchmark, and dataset replay.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqstop/policy.hpp"
#include "seqstop/posterior.hpp"
#include "seqstop/rates.hpp"
#include "seqstop/replay.hpp"
#include "seqstop/simulate.hpp"

using namespace seqstop;

namespace {

// "0.5,0.2,0.3-rest": explicit probabilities, with an optional trailing
// "<mass>-rest" expanded into chunks no larger than the last explicit entry
std::vector<double> parse_prior_spec(const std::string& spec) {
    std::vector<double> probs;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const bool rest = token.size() > 5 && token.substr(token.size() - 5) == "-rest";
        if (rest) {
            if (probs.empty()) throw std::runtime_error("prior spec: '-rest' needs a preceding entry");
            double mass = std::stod(token.substr(0, token.size() - 5));
            const double chunk = probs.back();
            if (chunk <= 0.0) throw std::runtime_error("prior spec: '-rest' after a zero entry");
            while (mass > chunk + 1e-15) {
                probs.push_back(chunk);
                mass -= chunk;
            }
            if (mass > 1e-15) probs.push_back(mass);
        } else {
            probs.push_back(std::stod(token));
        }
    }
    if (probs.empty()) throw std::runtime_error("prior spec: no entries");
    return probs;
}

// "(10,1),(3,2),(2,1)" -> frequency levels
std::vector<FrequencyLevel> parse_counts_spec(const std::string& spec) {
    std::vector<FrequencyLevel> levels;
    size_t i = 0;
    while (i < spec.size()) {
        if (spec[i] == ',' || spec[i] == ' ') {
            ++i;
            continue;
        }
        if (spec[i] != '(') throw std::runtime_error("counts spec: expected '(' at position " +
                                                     std::to_string(i));
        const size_t close = spec.find(')', i);
        if (close == std::string::npos) throw std::runtime_error("counts spec: unbalanced '('");
        const std::string body = spec.substr(i + 1, close - i - 1);
        const size_t comma = body.find(',');
        if (comma == std::string::npos) throw std::runtime_error("counts spec: expected '(v,c)'");
        levels.push_back({std::stoi(body.substr(0, comma)), std::stoi(body.substr(comma + 1))});
        i = close + 1;
    }
    if (levels.empty()) throw std::runtime_error("counts spec: no levels");
    return levels;
}

std::vector<Prior> parse_candidates_spec(const std::string& spec) {
    std::vector<Prior> candidates;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ';'))
        if (!part.empty()) candidates.push_back(Prior::candidate(parse_prior_spec(part)));
    if (candidates.empty()) throw std::runtime_error("candidates spec: no priors");
    return candidates;
}

int default_threads() {
    if (const char* env = std::getenv("SEQSTOP_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

PolicySpec parse_policy_name(const std::string& name) {
    PolicySpec spec;
    spec.id = name;
    std::string base = name;
    if (base.size() > 10 && base.substr(base.size() - 10) == "-uncertain") {
        spec.use_hyper = true;
        base = base.substr(0, base.size() - 10);
    } else if (base.size() > 6 && base.substr(base.size() - 6) == "-known") {
        base = base.substr(0, base.size() - 6);
    }
    if (base == "asc") {
        spec.asc = true;
    } else if (base == "exact") {
        spec.aggregation = std::nullopt;
    } else if (base.rfind("L=", 0) == 0) {
        spec.aggregation = std::stoi(base.substr(2));
    } else {
        throw std::runtime_error("unknown policy '" + name +
                                 "' (expected L=<n>, exact, asc, with optional -known/-uncertain)");
    }
    return spec;
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan plan;
    const auto& scenario = j.at("scenario");
    if (scenario.contains("prior")) {
        plan.scenario = Prior::known(scenario.at("prior").get<std::vector<double>>());
    } else if (scenario.contains("candidates")) {
        std::vector<Prior> candidates;
        for (const auto& c : scenario.at("candidates"))
            candidates.push_back(Prior::candidate(c.get<std::vector<double>>()));
        std::vector<double> weights;
        if (scenario.contains("weights"))
            weights = scenario.at("weights").get<std::vector<double>>();
        plan.scenario = make_hyper_prior(std::move(candidates), std::move(weights));
    } else {
        throw std::runtime_error("config: scenario needs 'prior' or 'candidates'");
    }
    for (const auto& p : j.at("policies")) {
        PolicySpec spec;
        spec.id = p.at("id").get<std::string>();
        spec.asc = p.value("asc", false);
        if (p.contains("L")) spec.aggregation = p.at("L").get<int>();
        spec.use_hyper = p.value("uncertain", false);
        if (!spec.asc && !spec.aggregation && !p.value("exact", false))
            throw std::runtime_error("config: policy '" + spec.id +
                                     "' needs one of L/exact/asc");
        plan.policies.push_back(std::move(spec));
    }
    plan.thresholds = j.at("thresholds").get<std::vector<double>>();
    plan.trials = j.value("trials", 10000);
    plan.master_seed = j.value("seed", uint64_t{1});
    plan.max_samples = j.value("max_samples", 100);
    plan.per_truth_breakdown = j.value("per_truth", false);
    return plan;
}

template <typename Rows, typename CsvFn, typename TableFn>
void emit(const Rows& rows, const std::string& out_path, std::string format, CsvFn csv,
          TableFn table) {
    if (format.empty()) format = out_path.empty() ? "table" : "csv";
    std::ostringstream body;
    if (format == "csv")
        csv(body, rows);
    else if (format == "table")
        table(body, rows);
    else
        throw std::runtime_error("format must be 'csv' or 'table'");
    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << body.str();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequential Bayesian stopping for categorical mode identification"};
    app.require_subcommand(1);

    // --- rates ---
    std::string rates_prior, rates_candidates, rates_weights, rates_levels = "2,3";
    auto* rates_cmd = app.add_subcommand("rates", "asymptotic stopping-rate calculators");
    rates_cmd->add_option("--prior", rates_prior,
                          "true prior, e.g. 0.5,0.2,0.3-rest ('-rest' expands leftover mass)")
        ->required();
    rates_cmd->add_option("--L", rates_levels, "aggregation levels, comma separated");
    rates_cmd->add_option("--candidates", rates_candidates,
                          "semicolon-separated candidate priors for the uncertain-prior rate");
    rates_cmd->add_option("--weights", rates_weights, "candidate weights (default uniform)");

    // --- posterior ---
    std::string post_prior, post_counts;
    int post_level = 0;
    bool post_exact = false, post_allow_large = false;
    int post_n = -1;
    auto* post_cmd = app.add_subcommand("posterior", "evaluate one posterior probability");
    post_cmd->add_option("--prior", post_prior, "known prior spec")->required();
    post_cmd->add_option("--counts", post_counts, "count-of-counts, e.g. \"(10,1),(3,2),(2,1)\"")
        ->required();
    post_cmd->add_option("--L", post_level, "aggregation level (omit for exact)");
    post_cmd->add_flag("--exact", post_exact, "use the exact posterior");
    post_cmd->add_option("--n", post_n, "expected sample total (consistency check)");
    post_cmd->add_flag("--allow-large-k", post_allow_large, "override the K > 12 exact-mode guard");

    // --- simulate ---
    std::string sim_config, sim_out, sim_format;
    int sim_trials = -1, sim_threads = default_threads();
    int64_t sim_seed = -1;
    bool sim_timing = false;
    auto* sim_cmd = app.add_subcommand("simulate", "run a synthetic benchmark from a config file");
    sim_cmd->add_option("--config", sim_config, "JSON experiment config")->required();
    sim_cmd->add_option("--trials", sim_trials, "override trial count");
    sim_cmd->add_option("--seed", sim_seed, "override master seed");
    sim_cmd->add_option("--threads", sim_threads, "worker threads (env SEQSTOP_THREADS)");
    sim_cmd->add_option("--out", sim_out, "output path (default stdout)");
    sim_cmd->add_option("--format", sim_format, "csv | table");
    sim_cmd->add_flag("--timing", sim_timing, "include the per-trial timing column in CSV");

    // --- replay ---
    std::string rep_data, rep_out, rep_format, rep_thresholds = "0.95,0.975,0.99";
    std::string rep_policies = "L=2-known,L=3-known,L=2-uncertain,L=3-uncertain,asc";
    double rep_split = 0.7;
    uint64_t rep_split_seed = 0, rep_seed = 1;
    int rep_len = 100, rep_trials = 5, rep_threads = default_threads();
    auto* rep_cmd = app.add_subcommand("replay", "replay recorded answer distributions");
    rep_cmd->add_option("--data", rep_data, "JSON Lines question records")->required();
    rep_cmd->add_option("--split-fraction", rep_split, "training share (default 0.7)");
    rep_cmd->add_option("--split-seed", rep_split_seed, "train/test split seed");
    rep_cmd->add_option("--trajectory-length", rep_len, "bootstrap trajectory length");
    rep_cmd->add_option("--trials", rep_trials, "trajectories per question");
    rep_cmd->add_option("--thresholds", rep_thresholds, "comma-separated confidence levels");
    rep_cmd->add_option("--policies", rep_policies,
                        "comma-separated policies (L=<n>|exact|asc, -known/-uncertain suffix)");
    rep_cmd->add_option("--seed", rep_seed, "trajectory master seed");
    rep_cmd->add_option("--threads", rep_threads, "worker threads (env SEQSTOP_THREADS)");
    rep_cmd->add_option("--out", rep_out, "output path (default stdout)");
    rep_cmd->add_option("--format", rep_format, "csv | table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rates_cmd->parsed()) {
            const Prior truth = Prior::candidate(parse_prior_spec(rates_prior));
            std::vector<int> levels;
            std::stringstream ss(rates_levels);
            std::string tok;
            while (std::getline(ss, tok, ',')) levels.push_back(std::stoi(tok));

            std::cout << std::setprecision(6) << std::fixed;
            if (rates_candidates.empty()) {
                for (int lvl : levels)
                    std::cout << "rate L=" << lvl << ": " << rate_known(truth, lvl).rate << "\n";
            } else {
                std::vector<double> weights;
                if (!rates_weights.empty()) {
                    std::stringstream ws(rates_weights);
                    while (std::getline(ws, tok, ',')) weights.push_back(std::stod(tok));
                }
                const HyperPrior hyper =
                    make_hyper_prior(parse_candidates_spec(rates_candidates), weights);
                for (int lvl : levels) {
                    const RateReport r = rate_uncertain(truth, hyper, lvl);
                    std::cout << "rate L=" << lvl << " (uncertain): " << r.rate
                              << "  binding candidate m=" << (*r.argmin_index + 1);
                    if (r.argmin_tie) std::cout << " (tie)";
                    std::cout << "  J =";
                    for (double jv : r.components) std::cout << ' ' << jv;
                    std::cout << "\n";
                }
            }
            std::cout << "rate prior-free: " << rate_prior_free(truth).rate << "\n";
        } else if (post_cmd->parsed()) {
            const Prior prior = Prior::known(parse_prior_spec(post_prior));
            const CountState state = CountState::from_levels(parse_counts_spec(post_counts));
            if (post_n >= 0 && post_n != state.total())
                throw std::runtime_error("counts sum to " + std::to_string(state.total()) +
                                         " but --n says " + std::to_string(post_n));
            double p;
            if (post_level > 0 && !post_exact)
                p = aggregated_posterior(prior, condense(state, post_level)).p_mode;
            else
                p = exact_posterior(prior, state, post_allow_large).p_mode;
            std::printf("%.12g\n", p);
        } else if (sim_cmd->parsed()) {
            std::ifstream f(sim_config);
            if (!f) throw std::runtime_error("cannot open config " + sim_config);
            nlohmann::json j;
            f >> j;
            ExperimentPlan plan = plan_from_json(j);
            if (sim_trials > 0) plan.trials = sim_trials;
            if (sim_seed >= 0) plan.master_seed = static_cast<uint64_t>(sim_seed);
            const std::vector<MetricsRow> rows = run_experiment(plan, sim_threads);
            emit(rows, sim_out, sim_format,
                 [&](std::ostream& os, const std::vector<MetricsRow>& r) {
                     write_metrics_csv(os, r, sim_timing);
                 },
                 [](std::ostream& os, const std::vector<MetricsRow>& r) {
                     write_metrics_table(os, r);
                 });
        } else if (rep_cmd->parsed()) {
            ReplayPlan plan;
            plan.split_fraction = rep_split;
            plan.split_seed = rep_split_seed;
            plan.trajectory_length = rep_len;
            plan.trials_per_question = rep_trials;
            plan.master_seed = rep_seed;
            std::stringstream ts(rep_thresholds);
            std::string tok;
            plan.thresholds.clear();
            while (std::getline(ts, tok, ',')) plan.thresholds.push_back(std::stod(tok));
            std::stringstream ps(rep_policies);
            while (std::getline(ps, tok, ',')) plan.policies.push_back(parse_policy_name(tok));

            const std::vector<QuestionRecord> records = ingest(rep_data);
            const std::vector<ReplayRow> rows = run_replay(records, plan, rep_threads);
            emit(rows, rep_out, rep_format,
                 [](std::ostream& os, const std::vector<ReplayRow>& r) {
                     write_replay_csv(os, r);
                 },
                 [](std::ostream& os, const std::vector<ReplayRow>& r) {
                     write_replay_table(os, r);
                 });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
