#include "anmod/surrogates.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <numbers>
#include <random>

namespace anmod {

namespace {

constexpr double kJosephsonScale = 163460.0;  // MHz nH
constexpr double kChargingScale = 19366.0;    // MHz fF

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double positive(const DesignPoint& x, const std::string& name) {
    if (!x.contains(name)) throw EvaluatorError(EvaluatorFault::missing_variable, name);
    const double v = x.at(name);
    if (!(v > 0.0) || !std::isfinite(v))
        throw EvaluatorError(EvaluatorFault::out_of_domain, name + " must be positive and finite");
    return v;
}

void check_mode_order(double f_qb, double f_res, const std::string& suffix) {
    if (!(f_qb < f_res)) {
        throw EvaluatorError(EvaluatorFault::mode_order,
                             "qubit" + suffix + " at " + std::to_string(f_qb) + " MHz is not below resonator" +
                                 suffix + " at " + std::to_string(f_res) + " MHz");
    }
}

}  // namespace

double NoiseModel::sigma(const std::string& parameter, int passes) const {
    if (!enabled || passes == kExactFidelity) return 0.0;
    auto it = sigma0.find(parameter);
    const double s0 = it == sigma0.end() ? default_sigma0 : it->second;
    return s0 * std::pow(ratio, -static_cast<double>(passes - min_passes));
}

void NoiseModel::apply(ParameterVector& y, int passes, std::uint64_t seed) const {
    if (!enabled || passes == kExactFidelity) return;
    ParameterVector out;
    for (const auto& [name, value] : y) {
        std::mt19937_64 rng(splitmix64(seed ^ fnv1a(name)));
        std::normal_distribution<double> z;
        out.set(name, value * std::exp(sigma(name, passes) * z(rng)));
    }
    y = std::move(out);
}

NoiseModel NoiseModel::eigenmode() {
    NoiseModel m;
    m.sigma0 = {{"kappa_res", 0.15}};
    return m;
}

NoiseModel NoiseModel::disabled() {
    NoiseModel m;
    m.enabled = false;
    return m;
}

CalibrationTable CalibrationTable::load(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::runtime_error("calibration file " + path.string() + ": " + e.message());
    }
    CalibrationTable table;
    for (const auto& [section, keys] : tree) {
        for (const auto& [key, value] : keys) {
            try {
                table.set(section, key, std::stod(value.data()));
            } catch (const std::exception&) {
                throw std::runtime_error("calibration file " + path.string() + ": [" + section + "] " + key +
                                         " is not a number");
            }
        }
    }
    return table;
}

double CalibrationTable::get(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s != values_.end()) {
        auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw std::runtime_error("calibration value [" + section + "] " + key + " is missing");
}

bool CalibrationTable::has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key);
}

void CalibrationTable::set(const std::string& section, const std::string& key, double value) {
    values_[section][key] = value;
}

std::map<std::string, double> CalibrationTable::section(const std::string& section) const {
    auto s = values_.find(section);
    return s == values_.end() ? std::map<std::string, double>{} : s->second;
}

TransmonLevels transmon_levels(double inductance_nh, double capacitance_ff, double junction_scale) {
    const double ec = kChargingScale / capacitance_ff;
    const double ej = junction_scale * kJosephsonScale / inductance_nh;
    return {std::sqrt(8.0 * ej * ec) - ec, ec};
}

QubitResonatorConstants QubitResonatorConstants::from(const CalibrationTable& t) {
    const std::string s = "constants";
    QubitResonatorConstants k;
    k.v_res = t.get(s, "v_res");
    k.c_w = t.get(s, "c_w");
    k.c_par = t.get(s, "c_par");
    k.c_claw = t.get(s, "c_claw");
    k.eta = t.get(s, "eta");
    k.g0 = t.get(s, "g0");
    k.coupling_exponent = t.get(s, "coupling_exponent");
    k.w_ref = t.get(s, "w_ref");
    k.w_qb_ref = t.get(s, "w_qb_ref");
    k.kappa0 = t.get(s, "kappa0");
    k.kappa_exponent = t.get(s, "kappa_exponent");
    k.l_ref = t.get(s, "l_ref");
    k.l_sat = t.get(s, "l_sat");
    return k;
}

QubitResonatorSurrogate::QubitResonatorSurrogate(QubitResonatorConstants constants, NoiseModel noise,
                                                 bool cross_terms)
    : k_(constants), noise_(std::move(noise)), cross_terms_(cross_terms) {}

std::vector<std::string> QubitResonatorSurrogate::variable_names() const {
    return {"l_res", "L_qb", "w_qb", "w_res_qb", "l_res_tl"};
}

std::vector<std::string> QubitResonatorSurrogate::parameter_names() const {
    return {"f_res", "f_qb", "alpha", "chi", "kappa_res"};
}

ParameterVector QubitResonatorSurrogate::noise_free(const DesignPoint& x) const {
    const double l_res = positive(x, "l_res");
    const double l_qb = positive(x, "L_qb");
    const double w_qb = positive(x, "w_qb");
    const double w_rq = positive(x, "w_res_qb");
    const double l_tl = positive(x, "l_res_tl");
    const double cross = cross_terms_ ? 1.0 : 0.0;

    const auto qb = transmon_levels(l_qb, k_.c_w * w_qb + k_.c_par + cross * k_.c_claw * w_rq);
    double f_qb = qb.frequency;
    const double alpha = qb.anharmonicity;
    double f_res = k_.v_res / (l_res + cross * k_.eta * l_tl);
    const double g = k_.g0 * std::pow(w_rq / k_.w_ref, k_.coupling_exponent) * (k_.w_qb_ref / w_qb);
    const double delta = f_qb - f_res;
    const double chi = g * g * alpha / (delta * (delta - alpha));
    double kappa = k_.kappa0 * std::pow(l_tl / k_.l_ref, k_.kappa_exponent);
    if (cross_terms_) {
        kappa /= 1.0 + (l_tl / k_.l_sat) * (l_tl / k_.l_sat);
        const double pull = g * g / (f_res - f_qb);
        f_res += pull;
        f_qb -= pull;
    }
    check_mode_order(f_qb, f_res, "");
    return {{"f_res", f_res}, {"f_qb", f_qb}, {"alpha", alpha}, {"chi", chi}, {"kappa_res", kappa}};
}

ParameterVector QubitResonatorSurrogate::evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const {
    auto y = noise_free(x);
    noise_.apply(y, fidelity, seed);
    return y;
}

TwoQubitConstants TwoQubitConstants::from(const CalibrationTable& t) {
    TwoQubitConstants k;
    for (int i = 0; i < 2; ++i) {
        const std::string s = "arm_" + std::to_string(i + 1);
        auto& a = k.arm[i];
        a.v_res = t.get(s, "v_res");
        a.c_w = t.get(s, "c_w");
        a.c_par = t.get(s, "c_par");
        a.c_claw = t.get(s, "c_claw");
        a.eta = t.get(s, "eta");
        a.g0 = t.get(s, "g0");
        a.coupling_exponent = t.get(s, "coupling_exponent");
        a.w_ref = t.get(s, "w_ref");
        a.w_qb_ref = t.get(s, "w_qb_ref");
        k.coupler_g0[i] = t.get("coupler", "coupler_g0_" + std::to_string(i + 1));
    }
    k.coupler_c_w = t.get("coupler", "coupler_c_w");
    k.coupler_c_par = t.get("coupler", "coupler_c_par");
    k.coupler_junction_scale = t.get("coupler", "coupler_junction_scale");
    k.coupler_exponent = t.get("coupler", "coupler_exponent");
    k.coupler_w_ref = t.get("coupler", "coupler_w_ref");
    k.detuning_floor = t.get("coupler", "detuning_floor");
    return k;
}

TwoQubitCouplerSurrogate::TwoQubitCouplerSurrogate(TwoQubitConstants constants, NoiseModel noise, bool cross_terms)
    : k_(constants), noise_(std::move(noise)), cross_terms_(cross_terms) {}

std::vector<std::string> TwoQubitCouplerSurrogate::variable_names() const {
    return {"l_res_1", "l_res_2", "L_qb_1", "L_qb_2", "L_c", "w_qb_1",
            "w_qb_2",  "w_c",     "w_res_qb_1", "w_res_qb_2", "w_c_qb_1", "w_c_qb_2"};
}

std::vector<std::string> TwoQubitCouplerSurrogate::parameter_names() const {
    return {"f_res_1", "f_res_2", "f_qb_1", "f_qb_2", "f_c",    "alpha_1",
            "alpha_2", "alpha_c", "chi_1",  "chi_2",  "chi_c1", "chi_c2"};
}

ParameterVector TwoQubitCouplerSurrogate::noise_free(const DesignPoint& x) const {
    const double cross = cross_terms_ ? 1.0 : 0.0;
    ParameterVector y;
    double f_qb[2];
    for (int i = 0; i < 2; ++i) {
        const std::string n = "_" + std::to_string(i + 1);
        const auto& a = k_.arm[i];
        const double w_rq = positive(x, "w_res_qb" + n);
        const double w_qb = positive(x, "w_qb" + n);
        const auto qb = transmon_levels(positive(x, "L_qb" + n), a.c_w * w_qb + a.c_par + cross * a.c_claw * w_rq);
        double f = qb.frequency;
        double f_res = a.v_res / (positive(x, "l_res" + n) + cross * a.eta * w_rq);
        const double g = a.g0 * std::pow(w_rq / a.w_ref, a.coupling_exponent) * (a.w_qb_ref / w_qb);
        const double delta = f - f_res;
        const double chi = g * g * qb.anharmonicity / (delta * (delta - qb.anharmonicity));
        if (cross_terms_) {
            const double pull = g * g / (f_res - f);
            f_res += pull;
            f -= pull;
        }
        check_mode_order(f, f_res, n);
        f_qb[i] = f;
        y.set("f_res" + n, f_res);
        y.set("f_qb" + n, f);
        y.set("alpha" + n, qb.anharmonicity);
        y.set("chi" + n, chi);
    }
    const auto coupler = transmon_levels(positive(x, "L_c"), k_.coupler_c_w * positive(x, "w_c") + k_.coupler_c_par,
                                         k_.coupler_junction_scale);
    y.set("f_c", coupler.frequency);
    y.set("alpha_c", coupler.anharmonicity);
    for (int i = 0; i < 2; ++i) {
        const std::string n = std::to_string(i + 1);
        const double g =
            k_.coupler_g0[i] * std::pow(k_.coupler_w_ref / positive(x, "w_c_qb_" + n), k_.coupler_exponent);
        y.set("chi_c" + n, g * g / std::hypot(coupler.frequency - f_qb[i], k_.detuning_floor));
    }
    return y;
}

ParameterVector TwoQubitCouplerSurrogate::evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const {
    auto y = noise_free(x);
    noise_.apply(y, fidelity, seed);
    return y;
}

CapacitanceConstants CapacitanceConstants::from(const CalibrationTable& t) {
    CapacitanceConstants k;
    k.c0 = t.get("constants", "c0");
    k.d_ref = t.get("constants", "d_ref");
    k.epsilon = t.get("constants", "epsilon");
    return k;
}

CapacitanceSurrogate::CapacitanceSurrogate(CapacitanceConstants constants, NoiseModel noise, bool cross_terms)
    : k_(constants), noise_(std::move(noise)), cross_terms_(cross_terms) {}

ParameterVector CapacitanceSurrogate::noise_free(const DesignPoint& x) const {
    const double d = positive(x, "d_coupling") / k_.d_ref;
    const double eps = cross_terms_ ? k_.epsilon : 0.0;
    return {{"C_coupling", k_.c0 / std::sqrt(d) * (1.0 + eps * d)}};
}

ParameterVector CapacitanceSurrogate::evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const {
    auto y = noise_free(x);
    noise_.apply(y, fidelity, seed);
    return y;
}

ChargeLineConstants ChargeLineConstants::from(const CalibrationTable& t) {
    ChargeLineConstants k;
    k.c_sigma = t.get("constants", "c_sigma");
    k.cc0 = t.get("constants", "cc0");
    k.d_ref = t.get("constants", "d_ref");
    k.d_offset = t.get("constants", "d_offset");
    k.coupling_exponent = t.get("constants", "coupling_exponent");
    k.frequency = t.get("constants", "frequency");
    k.impedance = t.get("constants", "impedance");
    return k;
}

ChargeLineT1Surrogate::ChargeLineT1Surrogate(ChargeLineConstants constants, NoiseModel noise)
    : k_(constants), noise_(std::move(noise)) {}

double ChargeLineT1Surrogate::coupling_capacitance(double d_tip) const {
    return k_.cc0 * std::pow(k_.d_ref / (d_tip + k_.d_offset), k_.coupling_exponent);
}

ParameterVector ChargeLineT1Surrogate::noise_free(const DesignPoint& x) const {
    const double cc = coupling_capacitance(positive(x, "d_tip")) * 1e-15;
    const double omega = 2.0 * std::numbers::pi * k_.frequency * 1e6;
    const double t1 = k_.c_sigma * 1e-15 / (omega * omega * cc * cc * k_.impedance);
    return {{"T1_limit", t1 * 1e6}};
}

ParameterVector ChargeLineT1Surrogate::evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const {
    auto y = noise_free(x);
    noise_.apply(y, fidelity, seed);
    return y;
}

}  // namespace anmod
