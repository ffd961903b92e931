#include <doctest.h>

#include <map>
#include <numeric>
#include <set>

#include "invariants.hpp"

using namespace anmod;

TEST_CASE("expression round trip over random trees") {
    const auto r = test::expression_round_trip(3000, 1);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("free variables match perturbation sensitivity") {
    const auto r = test::free_variable_perturbation(2000, 2);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("factorize partitions random square systems") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = std::uniform_int_distribution<int>(1, 7)(rng);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);

        ProblemFormulation pf;
        for (int v = 0; v < n; ++v) pf.design_variables.push_back(test::variable("v" + std::to_string(v), 1, 0.5, 2));
        for (int p = 0; p < n; ++p) {
            std::set<int> deps{perm[p]};
            for (int v = 0; v < n; ++v)
                if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) deps.insert(v);
            std::string model;
            for (int v : deps) model += (model.empty() ? "" : " * ") + std::string("v") + std::to_string(v);
            pf.parameters.push_back(test::targeted("p" + std::to_string(p), 1, model));
        }
        pf = prepare(pf);
        const auto blocks = factorize(pf);

        std::multiset<std::size_t> params, vars;
        std::map<std::size_t, int> rank_of_var;
        for (const auto& b : blocks) {
            CHECK(b.parameter_indices.size() == b.variable_indices.size());
            params.insert(b.parameter_indices.begin(), b.parameter_indices.end());
            vars.insert(b.variable_indices.begin(), b.variable_indices.end());
            for (auto v : b.variable_indices) rank_of_var[v] = b.solve_order;
        }
        REQUIRE(params.size() == static_cast<std::size_t>(n));
        REQUIRE(vars.size() == static_cast<std::size_t>(n));
        CHECK(std::set<std::size_t>(params.begin(), params.end()).size() == static_cast<std::size_t>(n));
        CHECK(std::set<std::size_t>(vars.begin(), vars.end()).size() == static_cast<std::size_t>(n));

        for (const auto& b : blocks) {
            const std::set<std::size_t> own(b.variable_indices.begin(), b.variable_indices.end());
            for (auto p : b.parameter_indices)
                for (const auto& name : pf.parameters[p].model->free_variables().design_variables) {
                    const auto v = *pf.variable_index(name);
                    CHECK((own.count(v) || rank_of_var.at(v) < b.solve_order));
                }
        }
    }
}

TEST_CASE("resolve_derived is idempotent") {
    std::mt19937_64 rng(4);
    const auto pf = prepare(test::reference_problem());
    for (int t = 0; t < 100; ++t) {
        const auto once = test::perturbed_targets(pf, rng);
        CHECK(resolve_derived(pf, once) == once);
    }
}

TEST_CASE("scale invariance of the update") {
    const auto r = test::scale_invariance(200, 5);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("fixed point at the targets") {
    const auto r = test::fixed_point(200, 6);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("filtered steps stay between old and new designs") {
    const auto r = test::monotone_filtering(300, 7);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("untargeted parameters are bit-identical") {
    const auto r = test::untargeted_invariance(300, 8);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("factorized update matches the joint minimum") {
    const auto r = test::factorized_vs_joint(9, 1e-9);
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("grid scan agrees between serial and parallel execution") {
    const auto cfg = test::shipped("qubit_resonator");
    const auto ev = make_backend(cfg);
    const auto x0 = cfg.problem.initial_point();
    const CostModel model(cfg.problem, x0, ev->evaluate(x0, kExactFidelity, 0));
    std::vector<double> lo, hi;
    for (const auto& v : cfg.problem.design_variables) {
        lo.push_back(v.lower_bound);
        hi.push_back(v.upper_bound);
    }
    const auto s = grid_minimum(model, lo, hi, 7, Execution::serial);
    const auto p = grid_minimum(model, lo, hi, 7, Execution::parallel);
    CHECK(s.x == p.x);
    CHECK(test::same_bits(s.cost, p.cost));
    CHECK(s.evaluations == 16807);
}

TEST_CASE("history round trip") {
    const auto r = test::history_round_trip();
    CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("deterministic replay") {
    const auto r = test::deterministic_replay();
    CHECK_MESSAGE(r.ok, r.detail);
}
