#pragma once

#include <vector>

#include "snsqkd/core.hpp"

namespace snsqkd {

// Physical model of the symmetric two-arm channel with an untrusted midpoint
// measurement node and two threshold detectors.
struct ChannelParams {
    double distance_km = 100.0;          // total separation between the parties
    double attenuation_db_per_km = 0.2;  // fiber loss coefficient
    double detector_efficiency = 0.8;    // folded into the arm transmittance
    double dark_count_prob = 1e-11;      // per detector per time window
    double misalignment = 0.15;          // e_a: wrong-port probability for one photon

    void validate() const;  // throws std::domain_error on out-of-range fields
};

// Protocol knobs shared by the analytic model, the Monte Carlo simulator and
// the key-rate pipeline.
struct ProtocolParams {
    double epsilon = 0.1;     // send probability inside a signal window
    double mu_signal = 0.5;   // signal intensity mu'
    std::vector<double> decoy_intensities = {0.0, 0.1, 0.4};  // ascending, mu0 = 0
    double lambda = 0.01;     // phase-slice width parameter of the post-selection
    double q_signal = 0.5;    // per-party probability of declaring a signal window
    double f_error_correction = 1.1;

    void validate() const;
    // Per-party probability of each decoy intensity: the non-signal mass split
    // evenly across the decoy set.
    std::vector<double> q_decoy() const;
};

// Window-averaged observables. For the analytic model these are exact
// expectations; the simulator produces the empirical analogue plus tagged
// ground truth.
struct ObservedRates {
    std::vector<double> intensities;  // decoy intensities the X rates refer to
    double s0 = 0.0;                  // vacuum-window counting rate
    std::vector<double> s_mu;         // X counting rate per intensity
    std::vector<double> e_mu_x;       // X bit error rate per intensity
    double s_z = 0.0;                 // Z-window counting rate S_Z
    double e_z = 0.0;                 // Z bit error rate E^Z
    double n_t_per_window = 0.0;      // surviving-bit fraction of Z windows (= s_z
                                      // when no test bits are sacrificed)
    double s1_true = 0.0;             // exact single-photon yield
    double e1x_true = 0.0;            // exact single-photon X error rate
};

// End-to-end survival probability of a photon from one party to a detector,
// with the measurement node midway: eta_d * 10^(-alpha*(d/2)/10).
double arm_transmittance(const ChannelParams& p);

struct ClickProbabilities {
    double left_only = 0.0;
    double right_only = 0.0;
    double both = 0.0;
    double none = 0.0;
};

// Threshold-detector outcome probabilities for mean photon numbers
// (intensity_left, intensity_right) arriving at the two output ports.
// Misalignment acts as a port swap, mixing the intensities before detection:
// I'_L = (1-e_a) I_L + e_a I_R (and symmetrically), then each detector clicks
// independently with probability 1 - (1-p_d) e^(-I').
ClickProbabilities click_probabilities(double intensity_left, double intensity_right,
                                       const ChannelParams& p);

// Exact window-averaged rates of the protocol in the matched-phase limit of a
// vanishing phase slice. Z windows compose the three send-decision branches
// (neither / one / both, the last integrated over the uniform unannounced
// phase difference); X windows use equal-intensity pulses with phase
// difference 0 or pi. Throws std::runtime_error if the phase-difference
// integration fails to converge.
ObservedRates analytic_rates(const ProtocolParams& prot, const ChannelParams& chan);

}  // namespace snsqkd
