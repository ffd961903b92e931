// Acceptance checks, one line per criterion. Exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>

#include "anmod/surrogates.hpp"
#include "invariants.hpp"

using namespace anmod;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Result {
    bool ok;
    std::string detail;
};

RunHistory run_config(const RunConfig& cfg) {
    const auto ev = make_backend(cfg);
    RunOptions opts;
    opts.fidelity = cfg.fidelity();
    return run(cfg.problem, *ev, cfg.optimizer, cfg.seed, opts);
}

double final_error(const RunHistory& h) {
    double worst = 0.0;
    const auto& y = h.records.back().y;
    for (const auto& [name, t] : h.targets) worst = std::max(worst, std::abs(y.at(name) / t - 1.0));
    return worst;
}

std::string describe(const RunHistory& h) {
    return std::string(to_string(h.status)) + " in " + std::to_string(h.iterations()) + " it, max err " +
           test::fmt(final_error(h));
}

double stddev(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / (v.size() - 1));
}

Result one_step_oracle() {
    const auto t0 = Clock::now();
    const auto pf = prepare(test::reference_problem());
    const DesignPoint solution{{"l_res", 8000}, {"L_qb", 10}, {"w_qb", 500}, {"w_res_qb", 300}, {"l_res_tl", 600}};
    const PerfectModelEvaluator truth(pf, PerfectModelEvaluator::scales_for_solution(pf, solution));
    const auto h = run(pf, truth, UpdateSettings{}, 1);
    const double dt = seconds_since(t0);
    const double err = h.records.size() > 1 ? max_relative_error(pf, h.records[1].y) : 1.0;
    return {err < 1e-6 && dt < 1.0, "error at k=1 " + test::fmt(err) + ", " + test::fmt(dt) + " s"};
}

Result qubit_resonator() {
    const auto t0 = Clock::now();
    const auto h = run_config(test::shipped("qubit_resonator"));
    const double dt = seconds_since(t0);
    const bool ok = h.status == RunStatus::success && final_error(h) < 0.01 && h.iterations() <= 10 && dt < 5.0;
    return {ok, describe(h) + ", " + test::fmt(dt) + " s"};
}

Result chi_models() {
    const std::vector<std::pair<std::string, std::string>> models{
        {"full", ""}, {"w", "w_res_qb"}, {"w^2", "w_res_qb ^ 2"}, {"w^3", "w_res_qb ^ 3"}};
    bool ok = true;
    std::string detail;
    int full_iterations = 0, fewest_other = 1 << 30;
    for (const auto& [label, model] : models) {
        std::vector<std::string> overrides;
        if (!model.empty()) overrides.push_back("parameters.chi.model=" + model);
        const auto h = run_config(test::shipped("qubit_resonator", overrides));
        ok = ok && h.status == RunStatus::success && final_error(h) < 0.01 && h.iterations() <= 10;
        (label == "full" ? full_iterations : fewest_other) =
            label == "full" ? h.iterations() : std::min(fewest_other, h.iterations());
        detail += label + " " + std::to_string(h.iterations()) + " it; ";
    }
    ok = ok && full_iterations <= fewest_other;

    auto sqrt_full = test::shipped("qubit_resonator", {"parameters.chi.model=sqrt(w_res_qb)"});
    const auto diverged = run_config(sqrt_full);
    auto sqrt_half = test::shipped("qubit_resonator", {"parameters.chi.model=sqrt(w_res_qb)",
                                                      "optimizer.adjustment_rate=0.5"});
    const auto restored = run_config(sqrt_half);
    ok = ok && diverged.status == RunStatus::diverged && restored.status == RunStatus::success &&
         final_error(restored) < 0.01;
    detail += "sqrt(w) gamma 1 " + std::string(to_string(diverged.status)) + ", gamma 0.5 " + describe(restored);
    return {ok, detail};
}

Result robustness() {
    const auto cfg = test::shipped("qubit_resonator");
    const auto batch = run_batch(cfg, *make_backend(cfg), 10, cfg.seed);
    int good = 0;
    bool flagged = true;
    for (const auto& r : batch.runs) {
        if (r.history.status == RunStatus::success && r.history.iterations() <= 10)
            ++good;
        else if (r.history.status != RunStatus::diverged && r.history.status != RunStatus::evaluator_error)
            flagged = false;
    }
    return {good >= 8 && flagged, std::to_string(good) + "/10 succeeded within 10 iterations, " +
                                      std::to_string(batch.count(RunStatus::diverged)) + " diverged, " +
                                      std::to_string(batch.count(RunStatus::evaluator_error)) +
                                      " evaluator errors, " + std::to_string(batch.count(RunStatus::max_iter)) +
                                      " max_iter"};
}

Result two_qubit() {
    const auto t0 = Clock::now();
    const auto h = run_config(test::shipped("two_qubit"));
    const double dt = seconds_since(t0);
    const bool ok = h.targets.size() == 12 && final_error(h) < 0.02 && h.iterations() <= 15 && dt < 30.0;
    return {ok, describe(h) + ", " + test::fmt(dt) + " s"};
}

Result capacitance_and_t1() {
    const auto c = run_config(test::shipped("capacitance"));
    const auto t = run_config(test::shipped("charge_line_t1"));
    const bool ok = final_error(c) < 0.01 && c.iterations() <= 8 && final_error(t) < 0.01 && t.iterations() <= 8;
    return {ok, "capacitance " + describe(c) + "; T1 " + describe(t)};
}

Result noise_study() {
    constexpr int seeds = 50;
    std::vector<double> spread;
    std::map<std::string, std::vector<double>> deviations;  // passes = 4, iterations >= 2
    for (int passes = 4; passes <= 10; ++passes) {
        const auto cfg = test::shipped("qubit_resonator",
                                       {"backend.noise=true", "backend.passes=" + std::to_string(passes)});
        const auto ev = make_backend(cfg);
        RunOptions opts;
        opts.fidelity = cfg.fidelity();
        std::vector<RunHistory> runs(seeds);
#pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < seeds; ++s) runs[s] = run(cfg.problem, *ev, cfg.optimizer, 1000 + s, opts);
        std::vector<double> finals;
        for (const auto& h : runs) {
            finals.push_back(h.records.back().x.at("l_res_tl"));
            if (passes != 4) continue;
            for (const auto& r : h.records) {
                if (r.k < 2) continue;
                for (const auto& [name, target] : h.targets)
                    if (r.y.contains(name)) deviations[name].push_back(r.y.at(name) / target - 1.0);
            }
        }
        spread.push_back(stddev(finals));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < spread.size(); ++i) decreasing = decreasing && spread[i] < spread[i - 1];

    std::string loudest;
    double loudest_rms = -1.0, kappa_rms = 0.0, runner_up = 0.0;
    for (const auto& [name, d] : deviations) {
        const double rms = std::sqrt(std::inner_product(d.begin(), d.end(), d.begin(), 0.0) / d.size());
        if (name == "kappa_res") kappa_rms = rms;
        else runner_up = std::max(runner_up, rms);
        if (rms > loudest_rms) loudest_rms = rms, loudest = name;
    }
    std::string detail = "std(l_res_tl) passes 4..10:";
    for (double s : spread) detail += " " + test::fmt(s);
    detail += "; rms fluctuation at passes 4: kappa_res " + test::fmt(kappa_rms) + ", next largest " +
              test::fmt(runner_up);
    return {decreasing && loudest == "kappa_res", detail};
}

Result invariant_suites() {
    const std::vector<std::pair<std::string, std::function<test::Outcome()>>> suites{
        {"scale invariance", [] { return test::scale_invariance(100, 11); }},
        {"fixed point", [] { return test::fixed_point(100, 12); }},
        {"factorized vs joint", [] { return test::factorized_vs_joint(17, 1e-9); }},
        {"untargeted invariance", [] { return test::untargeted_invariance(100, 13); }},
        {"expression round trip", [] { return test::expression_round_trip(2000, 14); }},
        {"history round trip", [] { return test::history_round_trip(); }},
        {"deterministic replay", [] { return test::deterministic_replay(); }},
    };
    bool ok = true;
    std::string detail;
    for (const auto& [name, check] : suites) {
        const auto r = check();
        ok = ok && r.ok;
        detail += (detail.empty() ? "" : "; ") + name + (r.ok ? " ok" : " FAILED") + " (" + r.detail + ")";
    }
    return {ok, detail};
}

Result sweep_fit() {
    const auto cfg = test::shipped("qubit_resonator", {"backend.cross_terms=false"});
    const auto ev = make_backend(cfg);
    const auto f = sweep(cfg, *ev, "l_res", {4000, 5000, 6000, 7000, 8000, 9000, 10000, 11000, 12000});
    const auto k = sweep(cfg, *ev, "l_res_tl", {100, 200, 300, 400, 600, 800, 1000, 1200, 1400});
    const auto& bf = f.fits.at("f_res");
    const auto& bk = k.fits.at("kappa_res");
    const bool ok = bf && bk && std::abs(bf->b + 1.0) <= 0.01 && std::abs(bk->b - 2.0) <= 0.02;
    return {ok, "b(f_res, l_res) = " + (bf ? test::fmt(bf->b) : "none") +
                    ", b(kappa_res, l_res_tl) = " + (bk ? test::fmt(bk->b) : "none")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
        {"one-step oracle with a perfect model", one_step_oracle},
        {"qubit-resonator convergence", qubit_resonator},
        {"dispersive-shift model accuracy study", chi_models},
        {"initial-condition robustness", robustness},
        {"two-qubit coupler system", two_qubit},
        {"capacitance and T1 targets", capacitance_and_t1},
        {"extraction noise versus passes", noise_study},
        {"invariant suites", invariant_suites},
        {"sweep and power-law fit", sweep_fit},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Result r{false, ""};
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failures += !r.ok;
        std::cout << "criterion " << i + 1 << ": " << (r.ok ? "PASS" : "FAIL") << "  " << criteria[i].first
                  << "  [" << r.detail << "]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
