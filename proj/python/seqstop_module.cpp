// Python bindings for the sequential-stopping core: priors, count states,
// tail constants, posteriors, stopping policies, and rate calculators.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seqstop/count_state.hpp"
#include "seqstop/policy.hpp"
#include "seqstop/posterior.hpp"
#include "seqstop/prior.hpp"
#include "seqstop/rates.hpp"
#include "seqstop/simulate.hpp"
#include "seqstop/stream.hpp"
#include "seqstop/tail_sum.hpp"

namespace py = pybind11;
using namespace seqstop;

namespace {

StoppingConfig make_config(double delta, std::optional<int> aggregation, int max_samples,
                           uint64_t seed, const std::optional<Prior>& prior,
                           const std::optional<HyperPrior>& hyper, bool allow_large_k) {
    StoppingConfig cfg;
    cfg.delta = delta;
    cfg.aggregation = aggregation;
    cfg.max_samples = max_samples;
    cfg.seed = seed;
    cfg.allow_large_k = allow_large_k;
    if (prior && hyper) throw std::invalid_argument("pass either prior or hyper_prior, not both");
    if (prior)
        cfg.prior_source = *prior;
    else if (hyper)
        cfg.prior_source = *hyper;
    else
        cfg.prior_source = PriorFree{};
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "sequential Bayesian stopping for categorical mode identification";

    py::register_exception<model_violation_error>(m, "ModelViolationError");

    py::enum_<TiePolicy>(m, "TiePolicy")
        .value("reject", TiePolicy::reject)
        .value("jitter", TiePolicy::jitter);

    py::class_<Prior>(m, "Prior")
        .def_static("known", &Prior::known, py::arg("probs"),
                    py::arg("tie") = TiePolicy::reject)
        .def_static("candidate", &Prior::candidate, py::arg("probs"),
                    py::arg("tie") = TiePolicy::reject)
        .def("__len__", &Prior::size)
        .def("__getitem__", [](const Prior& p, int i) {
            if (i < 0 || i >= p.size()) throw py::index_error();
            return p[i];
        })
        .def_property_readonly("probs", &Prior::probs)
        .def_property_readonly("jittered", &Prior::jittered)
        .def("support", &Prior::support)
        .def("padded", &Prior::padded, py::arg("k"));

    py::class_<HyperPrior>(m, "HyperPrior")
        .def(py::init([](std::vector<Prior> candidates, std::vector<double> weights) {
                 return make_hyper_prior(std::move(candidates), std::move(weights));
             }),
             py::arg("candidates"), py::arg("weights") = std::vector<double>{})
        .def_readonly("candidates", &HyperPrior::candidates)
        .def_readonly("weights", &HyperPrior::weights)
        .def("__len__", &HyperPrior::size)
        .def_property_readonly("num_slots", &HyperPrior::num_slots);

    py::class_<FrequencyLevel>(m, "FrequencyLevel")
        .def(py::init<int, int>(), py::arg("count"), py::arg("multiplicity"))
        .def_readonly("count", &FrequencyLevel::count)
        .def_readonly("multiplicity", &FrequencyLevel::multiplicity)
        .def("__repr__", [](const FrequencyLevel& l) {
            return "(" + std::to_string(l.count) + "," + std::to_string(l.multiplicity) + ")";
        });

    py::class_<CountState>(m, "CountState")
        .def(py::init<>())
        .def_static("from_counts",
                    [](const std::vector<int>& counts) {
                        return CountState::from_counts(counts);
                    })
        .def_static("from_levels", &CountState::from_levels)
        .def("observe", &CountState::observe, py::arg("previous_count"))
        .def_property_readonly("levels", &CountState::levels)
        .def_property_readonly("total", &CountState::total)
        .def_property_readonly("distinct", &CountState::distinct)
        .def("answer_counts", &CountState::answer_counts)
        .def("__eq__", [](const CountState& a, const CountState& b) { return a == b; });

    py::class_<AggregatedCountState>(m, "AggregatedCountState")
        .def_readonly("head", &AggregatedCountState::head)
        .def_readonly("cutoff", &AggregatedCountState::cutoff)
        .def_readonly("head_count", &AggregatedCountState::head_count)
        .def_readonly("residual", &AggregatedCountState::residual)
        .def_readonly("total", &AggregatedCountState::total)
        .def_readonly("aggregation", &AggregatedCountState::aggregation);

    m.def("condense", &condense, py::arg("state"), py::arg("aggregation_level"));

    m.def(
        "tail_sum",
        [](std::vector<double> tail_probs, int cap, int head_tie_count, int residual) {
            return tail_sum({std::move(tail_probs), cap, head_tie_count, residual}).to_double();
        },
        py::arg("tail_probs"), py::arg("cap"), py::arg("head_tie_count"), py::arg("residual"));
    m.def(
        "tilde_tail_sum",
        [](std::vector<double> tail_probs, int cap, int head_tie_count, int residual) {
            return tilde_tail_sum({std::move(tail_probs), cap, head_tie_count, residual})
                .to_double();
        },
        py::arg("tail_probs"), py::arg("cap"), py::arg("head_tie_count"), py::arg("residual"));

    py::class_<PosteriorResult>(m, "PosteriorResult")
        .def_readonly("p_mode", &PosteriorResult::p_mode)
        .def_readonly("log_numerator", &PosteriorResult::log_numerator)
        .def_readonly("log_denominator", &PosteriorResult::log_denominator)
        .def("__repr__", [](const PosteriorResult& r) {
            return "PosteriorResult(p_mode=" + std::to_string(r.p_mode) + ")";
        });

    m.def("exact_posterior", &exact_posterior, py::arg("prior"), py::arg("state"),
          py::arg("allow_large_k") = false);
    m.def("hypothesis_posteriors", &hypothesis_posteriors, py::arg("prior"), py::arg("state"),
          py::arg("allow_large_k") = false);
    m.def("aggregated_posterior", &aggregated_posterior, py::arg("prior"), py::arg("agg"));
    m.def("mixture_posterior", &mixture_posterior, py::arg("hyper"), py::arg("state"),
          py::arg("allow_large_k") = false);
    m.def("mixture_aggregated_posterior", &mixture_aggregated_posterior, py::arg("hyper"),
          py::arg("agg"));

    py::class_<StopOutcome>(m, "StopOutcome")
        .def_readonly("stop_time", &StopOutcome::stop_time)
        .def_readonly("chosen", &StopOutcome::chosen)
        .def_readonly("final_confidence", &StopOutcome::final_confidence)
        .def_readonly("truncated", &StopOutcome::truncated);

    m.def(
        "run_policy",
        [](const std::vector<int>& tokens, double delta, std::optional<int> aggregation,
           std::optional<Prior> prior, std::optional<HyperPrior> hyper, int max_samples,
           uint64_t seed, bool allow_large_k) {
            const StoppingConfig cfg = make_config(delta, aggregation, max_samples, seed, prior,
                                                   hyper, allow_large_k);
            size_t i = 0;
            return run_policy(cfg, [&]() {
                if (i >= tokens.size())
                    throw std::runtime_error("token stream exhausted before stopping");
                return tokens[i++];
            });
        },
        py::arg("tokens"), py::arg("delta"), py::arg("aggregation") = std::nullopt,
        py::arg("prior") = std::nullopt, py::arg("hyper_prior") = std::nullopt,
        py::arg("max_samples") = 100, py::arg("seed") = 0, py::arg("allow_large_k") = false,
        "Run the stopping policy over a recorded token list (prior-free when neither prior "
        "nor hyper_prior is given).");

    m.def(
        "run_policy_sampled",
        [](const Prior& truth, double delta, std::optional<int> aggregation,
           std::optional<Prior> prior, std::optional<HyperPrior> hyper, int max_samples,
           uint64_t seed, bool allow_large_k) {
            const StoppingConfig cfg = make_config(delta, aggregation, max_samples, seed, prior,
                                                   hyper, allow_large_k);
            CategoricalSampler sampler(truth.probs(), derive_seed(seed, 0, 2));
            return run_policy(cfg, [&]() { return sampler.next(); });
        },
        py::arg("truth"), py::arg("delta"), py::arg("aggregation") = std::nullopt,
        py::arg("prior") = std::nullopt, py::arg("hyper_prior") = std::nullopt,
        py::arg("max_samples") = 100, py::arg("seed") = 0, py::arg("allow_large_k") = false,
        "Run one seeded trial against IID draws from `truth`.");

    m.def("k2_threshold", &k2_threshold, py::arg("p1"), py::arg("delta"));
    m.def("asc_confidence", &asc_confidence, py::arg("state"));
    m.def("asc_stop", &asc_stop, py::arg("state"), py::arg("delta"));
    m.def("beta_tail_above_half", &beta_tail_above_half, py::arg("a"), py::arg("b"));

    py::class_<RateReport>(m, "RateReport")
        .def_readonly("rate", &RateReport::rate)
        .def_readonly("argmin_index", &RateReport::argmin_index)
        .def_readonly("components", &RateReport::components)
        .def_readonly("argmin_tie", &RateReport::argmin_tie)
        .def("__repr__", [](const RateReport& r) {
            return "RateReport(rate=" + std::to_string(r.rate) + ")";
        });

    m.def("kl_bernoulli", &kl_bernoulli, py::arg("a"), py::arg("b"));
    m.def(
        "kl_categorical",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return kl_categorical(a, b);
        },
        py::arg("a"), py::arg("b"));
    m.def("rate_known", &rate_known, py::arg("prior"), py::arg("aggregation_level"));
    m.def("rate_prior_free", &rate_prior_free, py::arg("prior"));
    m.def("rate_uncertain", &rate_uncertain, py::arg("truth"), py::arg("hyper"),
          py::arg("aggregation_level"));
}
