#include <doctest.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "anmod/cli.hpp"
#include "anmod/history.hpp"
#include "anmod/report.hpp"
#include "anmod/studies.hpp"
#include "support.hpp"

using namespace anmod;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int count_files(const fs::path& dir, const std::string& prefix) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind(prefix, 0) == 0) ++n;
    return n;
}

boost::property_tree::ptree read_ini(const fs::path& p) {
    boost::property_tree::ptree t;
    boost::property_tree::read_ini(p.string(), t);
    return t;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = test::shipped("qubit_resonator");
    CHECK(cfg.name == "qubit_resonator");
    CHECK(cfg.problem.design_variables.size() == 5);
    CHECK(cfg.problem.targets().size() == 5);
    CHECK(cfg.backend.name == "qubit_resonator");
    CHECK(cfg.optimizer.adjustment_rate == 1.0);

    const auto over = test::shipped("qubit_resonator", {"optimizer.adjustment_rate=0.5", "design_variables.l_res.value=8000"});
    CHECK(over.optimizer.adjustment_rate == 0.5);

    CHECK_THROWS_AS(test::shipped("qubit_resonator", {"optimizer.adjustment_rate=0"}), ConfigError);
    CHECK_THROWS_AS(test::shipped("qubit_resonator", {"optimizer.bogus=1"}), ConfigError);
    CHECK_THROWS_AS(test::shipped("qubit_resonator", {"backend.name=hfss"}), ConfigError);
    CHECK_THROWS_AS(test::shipped("qubit_resonator", {"parameters.chi.model=w_typo"}), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nname = x\n", "."), ConfigError);

    try {
        test::shipped("qubit_resonator", {"parameters.chi.model=w_typo"});
    } catch (const ConfigError& e) {
        std::string all;
        for (const auto& p : e.problems()) all += p;
        CHECK(all.find("w_typo") != std::string::npos);
    }
}

TEST_CASE("run command") {
    SUBCASE("shipped qubit-resonator config") {
        const auto dir = test::scratch("run_qr");
        RunCommand cmd;
        cmd.config = test::config_dir() / "qubit_resonator.ini";
        cmd.out = dir;
        std::ostringstream out, err;
        CHECK(cli_run(cmd, out, err) == kExitSuccess);
        const auto h = read_history(dir / "history.jsonl");
        CHECK(h.status == RunStatus::success);
        CHECK(h.iterations() <= 10);

        const auto summary = read_ini(dir / "summary.ini");
        CHECK(summary.get<std::string>("run.status") == "SUCCESS");
        for (const char* p : {"f_res", "f_qb", "alpha", "chi", "kappa_res"})
            CHECK(std::abs(summary.get<double>(std::string("final_relative_error.") + p)) < 0.01);
    }
    SUBCASE("shipped two-qubit config") {
        RunCommand cmd;
        cmd.config = test::config_dir() / "two_qubit.ini";
        cmd.out = test::scratch("run_tq");
        std::ostringstream out, err;
        CHECK(cli_run(cmd, out, err) == kExitSuccess);
    }
    SUBCASE("zero adjustment rate") {
        RunCommand cmd;
        cmd.config = test::config_dir() / "qubit_resonator.ini";
        cmd.adjustment_rate = 0.0;
        cmd.out = test::scratch("run_gamma0");
        std::ostringstream out, err;
        CHECK(cli_run(cmd, out, err) == kExitConfigError);
        CHECK(err.str().find("adjustment_rate") != std::string::npos);
        CHECK_FALSE(fs::exists(*cmd.out / "history.jsonl"));
    }
    SUBCASE("exit codes follow the run status") {
        RunCommand cmd;
        cmd.config = test::config_dir() / "qubit_resonator.ini";
        cmd.out = test::scratch("run_codes");
        std::ostringstream out, err;
        cmd.max_iterations = 1;
        CHECK(cli_run(cmd, out, err) == kExitMaxIter);
        cmd.max_iterations.reset();
        cmd.overrides = {"parameters.chi.model=sqrt(w_res_qb)"};
        CHECK(cli_run(cmd, out, err) == kExitDiverged);
        cmd.overrides = {"design_variables.L_qb.value=5", "design_variables.w_qb.value=100",
                         "design_variables.l_res.value=12000"};
        CHECK(cli_run(cmd, out, err) == kExitEvaluatorError);
    }
}

TEST_CASE("batch") {
    const auto cfg = test::shipped("qubit_resonator");
    const auto ev = make_backend(cfg);

    SUBCASE("empty batch") {
        const auto dir = test::scratch("batch_empty");
        BatchCommand cmd;
        cmd.config = test::config_dir() / "qubit_resonator.ini";
        cmd.n = 0;
        cmd.out = dir;
        std::ostringstream out, err;
        CHECK(cli_batch(cmd, out, err) == kExitSuccess);
        const auto summary = read_ini(dir / "batch_summary.ini");
        CHECK(summary.get<int>("batch.runs") == 0);
        CHECK(summary.get<int>("batch.success") == 0);
        CHECK(lines(dir / "batch_runs.csv").size() == 1);
    }
    SUBCASE("deterministic and independent of execution") {
        const auto a = run_batch(cfg, *ev, 6, 99, Execution::parallel);
        const auto b = run_batch(cfg, *ev, 6, 99, Execution::parallel);
        const auto s = run_batch(cfg, *ev, 6, 99, Execution::serial);
        REQUIRE(a.runs.size() == 6);
        for (std::size_t i = 0; i < a.runs.size(); ++i) {
            CHECK(a.runs[i].seed == 99 + i);
            CHECK(a.runs[i].history == b.runs[i].history);
            CHECK(a.runs[i].history == s.runs[i].history);
        }
        const auto d1 = test::scratch("batch_a");
        const auto d2 = test::scratch("batch_b");
        save_batch(d1, a, cfg);
        save_batch(d2, s, cfg);
        CHECK(slurp(d1 / "batch_summary.ini") == slurp(d2 / "batch_summary.ini"));
        CHECK(slurp(d1 / "batch_runs.csv") == slurp(d2 / "batch_runs.csv"));
        CHECK(slurp(d1 / "run_003" / "history.jsonl") == slurp(d2 / "run_003" / "history.jsonl"));
    }
    SUBCASE("initial points stay inside the bounds") {
        const auto points = sample_initial_points(cfg.problem, 200, 5);
        CHECK(points.size() == 200);
        for (const auto& x : points)
            for (const auto& v : cfg.problem.design_variables) {
                CHECK(x.at(v.name) >= v.lower_bound);
                CHECK(x.at(v.name) <= v.upper_bound);
            }
        CHECK(sample_initial_points(cfg.problem, 3, 5)[2] == points[2]);
    }
}

TEST_CASE("power-law fit") {
    const std::vector<double> x{1, 2, 4, 8};
    const std::vector<double> y{3, 12, 48, 192};
    const auto fit = fit_power_law(x, y);
    REQUIRE(fit);
    CHECK(fit->a == doctest::Approx(3));
    CHECK(fit->b == doctest::Approx(2));
    CHECK(fit->residual == doctest::Approx(0).epsilon(1e-12));
    CHECK(fit->points == 4);

    const std::vector<double> one{2};
    CHECK_FALSE(fit_power_law(one, one));
    const std::vector<double> same_x{2, 2};
    const std::vector<double> any_y{1, 5};
    CHECK_FALSE(fit_power_law(same_x, any_y));
}

TEST_CASE("sweep") {
    SUBCASE("constant output") {
        const auto cfg = test::shipped("qubit_resonator");
        const ConstantEvaluator ev({}, ParameterVector{{"f_res", 6000}});
        const auto r = sweep(cfg, ev, "l_res", {5000, 6000, 7000, 8000});
        REQUIRE(r.fits.at("f_res"));
        CHECK(r.fits.at("f_res")->b == doctest::Approx(0).epsilon(1e-12));
    }
    SUBCASE("resonator length without cross-terms") {
        const auto cfg = test::shipped("qubit_resonator", {"backend.cross_terms=false"});
        const auto r = sweep(cfg, *make_backend(cfg), "l_res", {5000, 6000, 7000, 8000, 9000, 10000});
        CHECK(r.fits.at("f_res")->b == doctest::Approx(-1.0).epsilon(0.01));
    }
    SUBCASE("out-of-bounds values are skipped with a note") {
        const auto dir = test::scratch("sweep");
        SweepCommand cmd;
        cmd.config = test::config_dir() / "qubit_resonator.ini";
        cmd.variable = "l_res_tl";
        cmd.values = {50, 200, 400, 800};
        cmd.out = dir;
        std::ostringstream out, err;
        CHECK(cli_sweep(cmd, out, err) == kExitSuccess);
        CHECK(out.str().find("skipped") != std::string::npos);
        CHECK(fs::exists(dir / "sweep_l_res_tl.csv"));
        CHECK(fs::exists(dir / "sweep_l_res_tl_fit.csv"));

        cmd.variable = "nope";
        CHECK(cli_sweep(cmd, out, err) == kExitConfigError);
    }
}

TEST_CASE("report") {
    SUBCASE("single iteration") {
        const auto pf = prepare(test::reference_problem());
        const ConstantEvaluator ev({}, resolve_derived(pf, pf.targets()));
        const auto h = run(pf, ev, UpdateSettings{}, 1);
        const auto dir = test::scratch("report_one");
        write_history(dir / "history.jsonl", h);

        ReportCommand cmd;
        cmd.history = dir / "history.jsonl";
        std::ostringstream out, err;
        CHECK(cli_report(cmd, out, err) == kExitSuccess);
        CHECK(lines(dir / "report" / "errors.csv").size() == 2);
        CHECK(lines(dir / "report" / "variables.csv").size() == 2);
    }
    SUBCASE("qubit-resonator run") {
        const auto cfg = test::shipped("qubit_resonator");
        const auto h = run(cfg.problem, *make_backend(cfg), cfg.optimizer, cfg.seed);
        const auto dir = test::scratch("report_qr");
        const auto files = write_report(h, dir);
        CHECK(files.charts.size() == 10);
        CHECK(count_files(dir, "target_") == 5);
        CHECK(count_files(dir, "variable_") == 5);
        CHECK(lines(files.errors_csv).size() == h.records.size() + 1);
        const auto svg = slurp(dir / "target_f_res.svg");
        CHECK(svg.find("class=\"target\"") != std::string::npos);
        CHECK(svg.find("stroke-dasharray") != std::string::npos);
        CHECK(slurp(dir / "variable_l_res.svg").find("class=\"target\"") == std::string::npos);
    }
    SUBCASE("corrupt history line") {
        const auto cfg = test::shipped("qubit_resonator");
        const auto h = run(cfg.problem, *make_backend(cfg), cfg.optimizer, cfg.seed);
        const auto dir = test::scratch("report_corrupt");
        std::ostringstream text;
        write_history(text, h);
        auto content = text.str();
        const auto second = content.find('\n') + 1;
        content.insert(second + 10, "}{");
        std::ofstream(dir / "history.jsonl", std::ios::binary) << content;

        ReportCommand cmd;
        cmd.history = dir / "history.jsonl";
        std::ostringstream out, err;
        CHECK(cli_report(cmd, out, err) == kExitConfigError);
        CHECK(err.str().find("line 2") != std::string::npos);
    }
}
