#pragma once

// Closed-form surrogate backends standing in for eigenmode and
// capacitance simulations. Frequencies are in MHz, lengths in um,
// inductances in nH and capacitances in fF.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "anmod/evaluator.hpp"

namespace anmod {

/// Relative extraction noise that shrinks with the refinement pass count:
/// sigma(p) = sigma0 * ratio^-(p - min_passes), applied as y * exp(sigma z).
struct NoiseModel {
    std::map<std::string, double> sigma0;  // per parameter; others use default_sigma0
    double default_sigma0 = 0.01;
    double ratio = 1.5;
    int min_passes = 3;
    bool enabled = true;

    double sigma(const std::string& parameter, int passes) const;
    void apply(ParameterVector& y, int passes, std::uint64_t seed) const;

    /// Noise profile of the eigenmode backends: kappa-like parameters are the noisiest.
    static NoiseModel eigenmode();
    static NoiseModel disabled();
};

/// Flat section/key table read from an INI calibration file.
class CalibrationTable {
public:
    static CalibrationTable load(const std::filesystem::path& path);

    double get(const std::string& section, const std::string& key) const;
    bool has(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, double value);
    std::map<std::string, double> section(const std::string& section) const;

private:
    std::map<std::string, std::map<std::string, double>> values_;
};

/// Transmon frequency and anharmonicity from junction inductance and shunt capacitance.
struct TransmonLevels {
    double frequency;
    double anharmonicity;
};
TransmonLevels transmon_levels(double inductance_nh, double capacitance_ff, double junction_scale = 1.0);

struct QubitResonatorConstants {
    double v_res = 0.0;   // f_res = v_res / l_res
    double c_w = 0.0;     // pad capacitance per width
    double c_par = 5.0;
    double c_claw = 0.02; // claw loading of the qubit, per um of w_res_qb
    double eta = 0.05;    // feedline coupler loading of the resonator length
    double g0 = 0.0;
    double coupling_exponent = 0.75;
    double w_ref = 100.0;
    double w_qb_ref = 400.0;
    double kappa0 = 0.0;
    double kappa_exponent = 2.0;
    double l_ref = 400.0;
    double l_sat = 700.0;

    static QubitResonatorConstants from(const CalibrationTable& table);
};

/// Qubit coupled to a readout resonator coupled to a feedline.
/// Variables l_res, L_qb, w_qb, w_res_qb, l_res_tl; parameters
/// f_res, f_qb, alpha, chi, kappa_res.
class QubitResonatorSurrogate final : public Evaluator {
public:
    QubitResonatorSurrogate(QubitResonatorConstants constants, NoiseModel noise, bool cross_terms = true);

    std::string name() const override { return "qubit_resonator"; }
    std::vector<std::string> variable_names() const override;
    std::vector<std::string> parameter_names() const override;
    ParameterVector evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const override;

    ParameterVector noise_free(const DesignPoint& x) const;
    const QubitResonatorConstants& constants() const noexcept { return k_; }

private:
    QubitResonatorConstants k_;
    NoiseModel noise_;
    bool cross_terms_;
};

struct QubitArmConstants {
    double v_res = 0.0;
    double c_w = 0.0;
    double c_par = 5.0;
    double c_claw = 0.02;
    double eta = 0.05;
    double g0 = 0.0;
    double coupling_exponent = 0.75;
    double w_ref = 50.0;
    double w_qb_ref = 170.0;
};

struct TwoQubitConstants {
    QubitArmConstants arm[2];
    double coupler_c_w = 0.0;
    double coupler_c_par = 5.0;
    double coupler_junction_scale = 0.0;  // flux-biased SQUID: effective E_J fraction
    double coupler_g0[2] = {0.0, 0.0};
    double coupler_exponent = 0.6;
    double coupler_w_ref = 13.0;
    double detuning_floor = 200.0;

    static TwoQubitConstants from(const CalibrationTable& table);
};

/// Two qubits with individual readout resonators and a tunable coupler.
/// Variables and parameters carry the suffix _1/_2 per arm.
class TwoQubitCouplerSurrogate final : public Evaluator {
public:
    TwoQubitCouplerSurrogate(TwoQubitConstants constants, NoiseModel noise, bool cross_terms = true);

    std::string name() const override { return "two_qubit"; }
    std::vector<std::string> variable_names() const override;
    std::vector<std::string> parameter_names() const override;
    ParameterVector evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const override;

    ParameterVector noise_free(const DesignPoint& x) const;

private:
    TwoQubitConstants k_;
    NoiseModel noise_;
    bool cross_terms_;
};

struct CapacitanceConstants {
    double c0 = 0.0;
    double d_ref = 10.0;
    double epsilon = 0.1;

    static CapacitanceConstants from(const CalibrationTable& table);
};

/// Coupling capacitance between a resonator and a feedline versus their
/// separation d_coupling: C = c0 / sqrt(d / d_ref) * (1 + epsilon d / d_ref).
class CapacitanceSurrogate final : public Evaluator {
public:
    CapacitanceSurrogate(CapacitanceConstants constants, NoiseModel noise, bool cross_terms = true);

    std::string name() const override { return "capacitance"; }
    std::vector<std::string> variable_names() const override { return {"d_coupling"}; }
    std::vector<std::string> parameter_names() const override { return {"C_coupling"}; }
    ParameterVector evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const override;

    ParameterVector noise_free(const DesignPoint& x) const;

private:
    CapacitanceConstants k_;
    NoiseModel noise_;
    bool cross_terms_;
};

struct ChargeLineConstants {
    double c_sigma = 90.0;  // total qubit capacitance
    double cc0 = 0.0;       // charge-line coupling capacitance at d_ref
    double d_ref = 20.0;
    double d_offset = 8.0;
    double coupling_exponent = 1.5;
    double frequency = 4000.0;
    double impedance = 50.0;

    static ChargeLineConstants from(const CalibrationTable& table);
};

/// T1 limit (us) of a qubit decaying into a charge line whose tip sits at
/// distance d_tip: T1 = C_sigma / (omega^2 C_c^2 Z0).
class ChargeLineT1Surrogate final : public Evaluator {
public:
    ChargeLineT1Surrogate(ChargeLineConstants constants, NoiseModel noise);

    std::string name() const override { return "charge_line_t1"; }
    std::vector<std::string> variable_names() const override { return {"d_tip"}; }
    std::vector<std::string> parameter_names() const override { return {"T1_limit"}; }
    ParameterVector evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const override;

    ParameterVector noise_free(const DesignPoint& x) const;
    double coupling_capacitance(double d_tip) const;

private:
    ChargeLineConstants k_;
    NoiseModel noise_;
};

}  // namespace anmod
