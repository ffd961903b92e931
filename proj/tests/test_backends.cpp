#include <doctest.h>

#include <cmath>
#include <numeric>

#include "anmod/surrogates.hpp"
#include "support.hpp"

using namespace anmod;

namespace {

CalibrationTable calibration(const std::string& name) {
    return CalibrationTable::load(test::data_dir() / "calibration" / (name + ".ini"));
}

void check_golden(const Evaluator& ev, const nlohmann::json& entry) {
    const auto y = ev.evaluate(test::design_from(entry["x"]), kExactFidelity, 0);
    const auto& expected = entry["y"];
    CHECK(y.size() == expected.size());
    for (auto it = expected.begin(); it != expected.end(); ++it) {
        INFO(it.key());
        CHECK(y.at(it.key()) == doctest::Approx(it->get<double>()).epsilon(1e-12));
    }
}

template <typename Make>
void check_golden_file(const std::string& backend, Make make) {
    const auto g = test::golden(backend);
    for (auto it = g.begin(); it != g.end(); ++it) {
        INFO(backend << " / " << it.key());
        const auto ev = make(it->at("cross_terms").get<bool>());
        check_golden(*ev, *it);
    }
}

const DesignPoint qr_initial{{"l_res", 7500}, {"L_qb", 12.1}, {"w_qb", 400}, {"w_res_qb", 100}, {"l_res_tl", 400}};

}  // namespace

TEST_CASE("golden outputs") {
    check_golden_file("qubit_resonator", [](bool cross) {
        return std::make_unique<QubitResonatorSurrogate>(
            QubitResonatorConstants::from(calibration("qubit_resonator")), NoiseModel::disabled(), cross);
    });
    check_golden_file("two_qubit", [](bool cross) {
        return std::make_unique<TwoQubitCouplerSurrogate>(TwoQubitConstants::from(calibration("two_qubit")),
                                                          NoiseModel::disabled(), cross);
    });
    check_golden_file("capacitance", [](bool cross) {
        return std::make_unique<CapacitanceSurrogate>(CapacitanceConstants::from(calibration("capacitance")),
                                                      NoiseModel::disabled(), cross);
    });
    check_golden_file("charge_line_t1", [](bool) {
        return std::make_unique<ChargeLineT1Surrogate>(ChargeLineConstants::from(calibration("charge_line_t1")),
                                                       NoiseModel::disabled());
    });
}

TEST_CASE("calibrated anchors hit the shipped targets") {
    const auto g = test::golden("qubit_resonator")["anchor"]["y"];
    CHECK(g["f_res"].get<double>() == doctest::Approx(6000));
    CHECK(g["f_qb"].get<double>() == doctest::Approx(4000));
    CHECK(g["alpha"].get<double>() == doctest::Approx(200));
    CHECK(g["chi"].get<double>() == doctest::Approx(1));
    CHECK(g["kappa_res"].get<double>() == doctest::Approx(1));
}

TEST_CASE("qubit-resonator surrogate") {
    const auto k = QubitResonatorConstants::from(calibration("qubit_resonator"));

    SUBCASE("resonator length scaling without cross-terms") {
        const QubitResonatorSurrogate ev(k, NoiseModel::disabled(), false);
        DesignPoint x = qr_initial;
        x.set("L_qb", 25);
        x.set("w_qb", 1000);
        x.set("l_res", 5000);
        const double f1 = ev.noise_free(x).at("f_res");
        x.set("l_res", 2 * 5000);
        CHECK(ev.noise_free(x).at("f_res") == doctest::Approx(f1 / 2).epsilon(1e-14));
    }
    SUBCASE("noise disabled is seed independent") {
        const QubitResonatorSurrogate ev(k, NoiseModel::disabled(), true);
        CHECK(ev.evaluate(qr_initial, 4, 1) == ev.evaluate(qr_initial, 4, 2));
        CHECK(ev.evaluate(qr_initial, kExactFidelity, 1) == ev.noise_free(qr_initial));
    }
    SUBCASE("monotone in the modelled directions") {
        const QubitResonatorSurrogate ev(k, NoiseModel::disabled(), true);
        const auto base = ev.noise_free(qr_initial);
        auto bumped = [&](const char* var) {
            DesignPoint x = qr_initial;
            x.set(var, x.at(var) * 1.01);
            return ev.noise_free(x);
        };
        CHECK(bumped("l_res").at("f_res") < base.at("f_res"));
        CHECK(bumped("L_qb").at("f_qb") < base.at("f_qb"));
        CHECK(bumped("w_qb").at("f_qb") < base.at("f_qb"));
        CHECK(bumped("w_qb").at("alpha") < base.at("alpha"));
        CHECK(bumped("w_res_qb").at("chi") > base.at("chi"));
        CHECK(bumped("l_res_tl").at("kappa_res") > base.at("kappa_res"));
    }
    SUBCASE("domain and mode-order failures") {
        const QubitResonatorSurrogate ev(k, NoiseModel::disabled(), true);
        DesignPoint x = qr_initial;
        x.set("w_qb", 0.0);
        CHECK_THROWS_AS(ev.evaluate(x, kExactFidelity, 0), EvaluatorError);

        x = qr_initial;
        x.set("L_qb", 5);
        x.set("w_qb", 100);
        x.set("l_res", 12000);
        try {
            ev.evaluate(x, kExactFidelity, 0);
            FAIL("expected a mode-order error");
        } catch (const EvaluatorError& e) {
            CHECK(e.fault() == EvaluatorFault::mode_order);
        }

        DesignPoint missing{{"l_res", 7500}};
        try {
            ev.evaluate(missing, kExactFidelity, 0);
            FAIL("expected a missing-variable error");
        } catch (const EvaluatorError& e) {
            CHECK(e.fault() == EvaluatorFault::missing_variable);
        }
    }
}

TEST_CASE("transmon levels") {
    const auto t = transmon_levels(12.1, 80.0);
    const double ej = 163460.0 / 12.1;
    const double ec = 19366.0 / 80.0;
    CHECK(t.frequency == doctest::Approx(std::sqrt(8 * ej * ec) - ec));
    CHECK(t.anharmonicity == doctest::Approx(ec));
}

TEST_CASE("two-qubit surrogate") {
    auto k = TwoQubitConstants::from(calibration("two_qubit"));
    const auto g = test::golden("two_qubit");
    const auto x0 = test::design_from(g["initial"]["x"]);

    SUBCASE("symmetric device") {
        k.arm[1] = k.arm[0];
        k.coupler_g0[1] = k.coupler_g0[0];
        const TwoQubitCouplerSurrogate ev(k, NoiseModel::disabled(), true);
        DesignPoint x = x0;
        for (const char* v : {"l_res", "L_qb", "w_qb", "w_res_qb", "w_c_qb"})
            x.set(std::string(v) + "_2", x.at(std::string(v) + "_1"));
        const auto y = ev.noise_free(x);
        CHECK(y.at("f_qb_1") == y.at("f_qb_2"));
        CHECK(y.at("f_res_1") == y.at("f_res_2"));
        CHECK(y.at("chi_1") == y.at("chi_2"));
        CHECK(y.at("chi_c1") == y.at("chi_c2"));
    }
    SUBCASE("coupler dispersive shift falls with the coupling gap") {
        const TwoQubitCouplerSurrogate ev(k, NoiseModel::disabled(), true);
        double prev = ev.noise_free(x0).at("chi_c1");
        DesignPoint x = x0;
        for (double w = x0.at("w_c_qb_1") + 1; w < 40; w += 3) {
            x.set("w_c_qb_1", w);
            const double now = ev.noise_free(x).at("chi_c1");
            CHECK(now < prev);
            prev = now;
        }
    }
    SUBCASE("every output is finite and positive") {
        const TwoQubitCouplerSurrogate ev(k, NoiseModel::disabled(), true);
        const auto y = ev.noise_free(x0);
        CHECK(y.size() == 12);
        for (const auto& [name, v] : y) {
            INFO(name);
            CHECK(std::isfinite(v));
            CHECK(v > 0);
        }
    }
}

TEST_CASE("capacitance surrogate") {
    auto k = CapacitanceConstants::from(calibration("capacitance"));

    SUBCASE("inverse square root law without the correction") {
        k.epsilon = 0.0;
        const CapacitanceSurrogate ev(k, NoiseModel::disabled(), true);
        const double c1 = ev.noise_free(DesignPoint{{"d_coupling", 12}}).at("C_coupling");
        const double c2 = ev.noise_free(DesignPoint{{"d_coupling", 24}}).at("C_coupling");
        CHECK(c2 / c1 == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    }
    SUBCASE("largest at the lower bound") {
        const CapacitanceSurrogate ev(k, NoiseModel::disabled(), true);
        const double at_lower = ev.noise_free(DesignPoint{{"d_coupling", 2}}).at("C_coupling");
        for (double d = 2.5; d <= 100; d += 0.5)
            CHECK(ev.noise_free(DesignPoint{{"d_coupling", d}}).at("C_coupling") < at_lower);
    }
}

TEST_CASE("charge-line T1 surrogate") {
    const ChargeLineT1Surrogate ev(ChargeLineConstants::from(calibration("charge_line_t1")), NoiseModel::disabled());
    double prev = 0.0;
    for (double d = 5; d <= 200; d += 5) {
        const double t1 = ev.noise_free(DesignPoint{{"d_tip", d}}).at("T1_limit");
        CHECK(t1 > prev);
        prev = t1;
    }
    CHECK(ev.coupling_capacitance(20) > ev.coupling_capacitance(40));
}

TEST_CASE("extraction noise") {
    const auto noise = NoiseModel::eigenmode();
    CHECK(noise.sigma("kappa_res", 3) == doctest::Approx(0.15));
    CHECK(noise.sigma("f_res", 3) == doctest::Approx(0.01));
    for (int p = 4; p <= 10; ++p) {
        CHECK(noise.sigma("kappa_res", p) < noise.sigma("kappa_res", p - 1));
        CHECK(noise.sigma("kappa_res", p) > noise.sigma("f_res", p));
    }
    CHECK(NoiseModel::disabled().sigma("kappa_res", 4) == 0.0);

    const QubitResonatorSurrogate ev(QubitResonatorConstants::from(calibration("qubit_resonator")), noise, true);
    CHECK(ev.evaluate(qr_initial, 4, 11) == ev.evaluate(qr_initial, 4, 11));
    CHECK(ev.evaluate(qr_initial, 4, 11) != ev.evaluate(qr_initial, 4, 12));
    CHECK(ev.evaluate(qr_initial, kExactFidelity, 11) == ev.noise_free(qr_initial));

    // log-normal spread matches sigma
    const double clean = ev.noise_free(qr_initial).at("kappa_res");
    std::vector<double> logs;
    for (std::uint64_t s = 0; s < 4000; ++s) logs.push_back(std::log(ev.evaluate(qr_initial, 4, s).at("kappa_res") / clean));
    const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
    double var = 0.0;
    for (double v : logs) var += (v - mean) * (v - mean);
    CHECK(std::sqrt(var / (logs.size() - 1)) == doctest::Approx(noise.sigma("kappa_res", 4)).epsilon(0.05));
    CHECK(std::abs(mean) < 0.01);
}
