#pragma once

#include <vector>

#include "snsqkd/channel.hpp"
#include "snsqkd/decoy.hpp"

namespace snsqkd {

struct KeyRateFlags {
    bool rate_clamped = false;
    bool s1_clamped = false;
    bool e1ph_clamped = false;
    bool all_zero_landscape = false;
};

struct KeyRateReport {
    double rate_per_window = 0.0;  // clamped at 0
    double rate_raw = 0.0;         // unclamped value, for diagnostics
    double optimized_epsilon = 0.0;
    double optimized_mu_signal = 0.0;
    DecoyEstimate estimate;
    ObservedRates rates;
    ProtocolParams protocol;  // echo of the operating parameters
    ChannelParams channel;    // echo
    KeyRateFlags flags;
    // Finite-session accounting, populated when n_windows > 0.
    double n_windows = 0.0;
    double n_z_windows = 0.0;
    double n_t = 0.0;
    double final_key_length = 0.0;
};

// Per-Z-window key rate:
//   R = 2 eps (1-eps) mu' e^(-mu') s1 (1 - H(e1ph)) - S_Z f H(E^Z),
// clamped below at 0 (raw variant unclamped). `clamped` reports clamping.
double rate_per_window(const ProtocolParams& prot, const ObservedRates& rates,
                       const DecoyEstimate& estimate, bool* clamped = nullptr);
double rate_per_window_raw(const ProtocolParams& prot, const ObservedRates& rates,
                           const DecoyEstimate& estimate);

// Final key length n1 (1 - H(e1ph)) - n_t f H(e_z), clamped below at 0.
double final_key_length(double n1, double e1ph, double n_t, double e_z, double f);

// Evaluates the full pipeline at the protocol's own (epsilon, mu_signal).
// When n_windows > 0, fills the finite-session fields using
// n_z = n_windows * q_signal^2.
KeyRateReport evaluate(const ProtocolParams& prot, const ChannelParams& chan,
                       DecoyMode mode, double n_windows = 0.0);

// Same pipeline on externally supplied rates (e.g. Monte Carlo estimates).
KeyRateReport evaluate_rates(const ProtocolParams& prot, const ChannelParams& chan,
                             const ObservedRates& rates, DecoyMode mode,
                             double n_windows = 0.0);

// Maximizes the rate over (epsilon, mu_signal): log-spaced coarse grid
// (epsilon in [1e-5, 0.5] — extended below 0.01 because the optimum sits
// there at high misalignment — mu' in [0.01, 1.0]), then coordinate-wise
// golden-section refinement to relative tolerance 1e-4. Deterministic. An
// all-nonpositive landscape returns rate 0 at the first grid point, flagged.
// fix_epsilon / fix_mu_signal hold the template's value for that coordinate.
KeyRateReport optimize(const ChannelParams& chan, const ProtocolParams& prot_template,
                       DecoyMode mode, double n_windows = 0.0,
                       bool fix_epsilon = false, bool fix_mu_signal = false);

enum class ScanAxis { distance, misalignment };

struct ScanPoint {
    double axis_value = 0.0;
    KeyRateReport report;
};

// One optimized report per grid value (axis value replaces the corresponding
// channel field). Grid is start, start+step, ... up to stop inclusive.
std::vector<ScanPoint> scan(ScanAxis axis, double start, double stop, double step,
                            const ChannelParams& chan_template,
                            const ProtocolParams& prot_template, DecoyMode mode);

// Largest distance with optimized rate > 1e-12 per window, located on a
// coarse grid and refined by bisection to 1 km. Returns d_lo when even that
// is insecure, d_hi when still secure there.
double secure_distance_km(const ChannelParams& chan_template,
                          const ProtocolParams& prot_template, DecoyMode mode,
                          double d_lo = 0.0, double d_hi = 1000.0);

}  // namespace snsqkd
