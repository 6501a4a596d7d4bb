#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "snsqkd/core.hpp"

namespace snsqkd::attack {

enum class DetectorBranch { d0, d1 };

// Truncated single-mode Fock vector plus one ancilla amplitude for the
// reference state |m0> (orthogonal to every Fock component by construction).
// amp[k] for k in [0, k_max] is the |k> amplitude; amp[k_max + 1] is |m0>.
// Sub-normalized states are legal mid-pipeline (squared norm <= 1 + 1e-12).
struct FockVector {
    std::vector<std::complex<double>> amp;
    int k_max = 0;

    double norm2() const;
    std::complex<double>& ancilla() { return amp[static_cast<std::size_t>(k_max) + 1]; }
    const std::complex<double>& ancilla() const {
        return amp[static_cast<std::size_t>(k_max) + 1];
    }
};

FockVector make_fock_vector(int k_max);

std::complex<double> inner_product(const FockVector& a, const FockVector& b);

// The single-mode coherent state of amplitude (-1)^bit sqrt(2 mu) e^{i rho}
// reaching the monitored beam-splitter output (branch d0); the other branch
// carries vacuum. Requires mu > 0 and a truncation tail below 1e-12.
FockVector incident_state(int bit, DetectorBranch branch, Intensity mu, double rho,
                          int k_max = 30);

// Each projection returns the renormalized post-projection state (zero vector
// if nothing survives) together with the absolute acceptance probability
// ||P v||^2 of the input as given.
std::pair<FockVector, double> project_nonvacuum(const FockVector& state);
std::pair<FockVector, double> project_S12(const FockVector& state);

// Applies |1> -> sqrt(mu)|1> + sqrt(1-mu)|m0>, |2> -> |2> (extended as a
// rotation on span{|1>, |m0>}, identity elsewhere), then projects off |m0>.
// mu > 1 is a domain error (the map is only unitary-extendable for mu <= 1).
std::pair<FockVector, double> filter_unitary_and_project(const FockVector& state,
                                                         Intensity mu);

// Removes the e^{i rho} phase from the |2> amplitude. The state must be
// supported on {|1>, |2>} (domain error otherwise).
FockVector phase_unwind(const FockVector& state, double rho);

struct AttackTrace {
    FockVector psi1, psi2, psi4, psi5;
    double acceptance_nonvacuum = 0.0;
    double acceptance_s12 = 0.0;
    double acceptance_filter = 0.0;
    double heralding = 0.0;  // product of the three acceptances
    int discriminated_bit = -1;
    DetectorBranch declared = DetectorBranch::d0;
};

// Deterministic pipeline walk for one encoded bit; discrimination is in the
// (|1> +- |2>)/sqrt(2) basis, which the surviving states occupy exactly.
AttackTrace trace_pipeline(int bit, Intensity mu, double rho, int k_max = 30);

struct AttackSummary {
    double mu = 0.0;
    double rho = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t trials_bit0 = 0;
    std::uint64_t trials_bit1 = 0;
    std::uint64_t accepted_trials = 0;
    std::uint64_t accepted_bit0 = 0;
    std::uint64_t accepted_bit1 = 0;
    double heralding_analytic = 0.0;       // 4 mu^2 e^(-2 mu)
    double heralding_analytic_bit0 = 0.0;  // pipeline acceptance product per bit
    double heralding_analytic_bit1 = 0.0;
    double heralding_empirical = 0.0;
    double heralding_empirical_bit0 = 0.0;
    double heralding_empirical_bit1 = 0.0;
    double discrimination_accuracy = 0.0;  // on accepted trials
    double psi5_inner_product = 0.0;       // |<psi5+|psi5->|
    double single_photon_fraction = 0.0;   // |<1|psi5>|^2
    double naive_key_fraction = 0.0;       // what tagged-bit accounting would claim
    double eve_information_bits = 0.0;     // bits Eve holds per accepted bit
};

// Samples `trials` random bits, pushes each through the acceptance pipeline
// (heralding failure = no detection announced), and measures the survivors.
// Deterministic per (mu, rho, trials, seed). Requires trials >= 1.
AttackSummary run_attack(Intensity mu, double rho, std::uint64_t trials,
                         std::uint64_t seed, int k_max = 30);

}  // namespace snsqkd::attack
