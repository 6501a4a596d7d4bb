#pragma once

#include "snsqkd/channel.hpp"
#include "snsqkd/core.hpp"
#include "snsqkd/simulator.hpp"

namespace snsqkd {

enum class DecoyMode { three_intensity, infinite };

// Single-photon estimates feeding the key-rate formula. In three-intensity
// mode s1_lower/e1ph_upper come from the decoy bounds; in infinite mode they
// are set to the exact tagged values.
struct DecoyEstimate {
    DecoyMode mode = DecoyMode::three_intensity;
    double s1_lower = 0.0;
    double s1_exact = 0.0;    // ground truth when the rates carry it
    double e1ph_upper = 0.0;
    double n1 = 0.0;          // estimated surviving single-photon bit count
    bool s1_clamped = false;
    bool e1ph_clamped = false;

    // The yield the key-rate formula consumes for the active mode.
    double s1() const { return s1_lower; }
};

// Lower bound on the single-photon yield from the vacuum rate and two decoy
// counting rates (0 < mu1 < mu2, both present in rates.intensities), clamped
// to [0, 1]. `clamped` (optional) reports whether clamping fired.
double s1_lower_bound(const ObservedRates& rates, Intensity mu1, Intensity mu2,
                      bool* clamped = nullptr);

// Upper bound on the single-photon phase-flip rate from the X error rate at
// intensity mu (> 0, present in rates.intensities) and a yield estimate
// s1 > 0, clamped to [0, 0.5].
double e1ph_upper_bound(const ObservedRates& rates, Intensity mu, double s1,
                        bool* clamped = nullptr);

// Phase-error accounting over effective X events, aggregated across
// intensities. `matched_min` pairs opposite-sign counts per detector and
// takes the smaller (never exceeding `joint_upper`, the plain wrong-detector
// fraction). Throws std::domain_error when there are no effective X events.
struct PhaseErrorEstimate {
    double matched_min = 0.0;   // sum_d min(N_{+,d}, N_{-,d}) / n
    double joint_upper = 0.0;   // (N_{-,L} + N_{+,R}) / n
};

PhaseErrorEstimate eph_from_tallies(const TallySet& tallies);

// Expected number of effective single-photon Z bits among n_z_windows:
// n_z * 2 eps (1-eps) * mu' e^(-mu') * s1.
double n1_estimate(const ProtocolParams& prot, double s1, double n_z_windows);

// Bundles the mode dispatch: three-intensity uses (mu1, mu2) =
// (intensities[1], intensities[2]) for the yield bound and mu1 for the error
// bound; infinite mode copies the exact tagged values. n1 is left 0 here
// (window counts are supplied by the key-rate layer).
DecoyEstimate estimate_single_photon(const ObservedRates& rates,
                                     const ProtocolParams& prot, DecoyMode mode);

}  // namespace snsqkd
