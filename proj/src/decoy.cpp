#include "snsqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace snsqkd {

namespace {

// Two-pulse Poisson weights for total photon number k at per-pulse
// intensity mu: p_k = e^(-2mu) (2mu)^k / k!.
double p0(double mu) { return std::exp(-2.0 * mu); }
double p1(double mu) { return 2.0 * mu * std::exp(-2.0 * mu); }
double p2(double mu) { return 2.0 * mu * mu * std::exp(-2.0 * mu); }

std::size_t intensity_index(const ObservedRates& rates, double mu) {
    for (std::size_t i = 0; i < rates.intensities.size(); ++i) {
        const double v = rates.intensities[i];
        if (std::abs(v - mu) <= 1e-9 * std::max(1.0, std::abs(v))) return i;
    }
    throw std::domain_error("intensity not present in the observed rates");
}

double clamp_flag(double value, double lo, double hi, bool* clamped) {
    if (value < lo || value > hi) {
        if (clamped) *clamped = true;
        return std::min(hi, std::max(lo, value));
    }
    if (clamped) *clamped = false;
    return value;
}

}  // namespace

double s1_lower_bound(const ObservedRates& rates, Intensity mu1, Intensity mu2,
                      bool* clamped) {
    const double m1 = mu1.value();
    const double m2 = mu2.value();
    if (!(0.0 < m1 && m1 < m2))
        throw std::domain_error("yield bound needs 0 < mu1 < mu2");
    const double s_mu1 = rates.s_mu[intensity_index(rates, m1)];
    const double s_mu2 = rates.s_mu[intensity_index(rates, m2)];
    const double numerator = p2(m2) * (s_mu1 - p0(m1) * rates.s0) -
                             p2(m1) * (s_mu2 - p0(m2) * rates.s0);
    const double denominator = p2(m2) * p1(m1) - p2(m1) * p1(m2);
    return clamp_flag(numerator / denominator, 0.0, 1.0, clamped);
}

double e1ph_upper_bound(const ObservedRates& rates, Intensity mu, double s1,
                        bool* clamped) {
    const double m = mu.value();
    if (m <= 0.0) throw std::domain_error("error bound needs mu > 0");
    if (s1 <= 0.0)
        throw std::domain_error("error bound needs s1 > 0 (no single-photon events)");
    const std::size_t i = intensity_index(rates, m);
    const double t_mu = rates.s_mu[i] * rates.e_mu_x[i];
    const double bound = (t_mu - p0(m) * rates.s0 / 2.0) / (p1(m) * s1);
    return clamp_flag(bound, 0.0, 0.5, clamped);
}

PhaseErrorEstimate eph_from_tallies(const TallySet& tallies) {
    std::uint64_t plus_left = 0, minus_left = 0, plus_right = 0, minus_right = 0;
    std::uint64_t effective = 0;
    for (const IntensityTally& it : tallies.x) {
        plus_left += it.n_plus_left;
        minus_left += it.n_minus_left;
        plus_right += it.n_plus_right;
        minus_right += it.n_minus_right;
        effective += it.effective;
    }
    if (effective == 0)
        throw std::domain_error("phase-error accounting needs effective X events");
    const double n = static_cast<double>(effective);
    PhaseErrorEstimate e;
    e.matched_min = (static_cast<double>(std::min(plus_left, minus_left)) +
                     static_cast<double>(std::min(plus_right, minus_right))) /
                    n;
    e.joint_upper =
        (static_cast<double>(minus_left) + static_cast<double>(plus_right)) / n;
    return e;
}

double n1_estimate(const ProtocolParams& prot, double s1, double n_z_windows) {
    if (s1 < 0.0 || n_z_windows < 0.0)
        throw std::domain_error("n1 estimate needs non-negative inputs");
    return n_z_windows * 2.0 * prot.epsilon * (1.0 - prot.epsilon) * prot.mu_signal *
           std::exp(-prot.mu_signal) * s1;
}

DecoyEstimate estimate_single_photon(const ObservedRates& rates,
                                     const ProtocolParams& prot, DecoyMode mode) {
    DecoyEstimate est;
    est.mode = mode;
    est.s1_exact = rates.s1_true;
    if (mode == DecoyMode::infinite) {
        est.s1_lower = rates.s1_true;
        est.e1ph_upper = rates.e1x_true;
        return est;
    }
    if (prot.decoy_intensities.size() < 3)
        throw std::domain_error("three-intensity estimation needs {0, mu1, mu2}");
    const Intensity mu1(prot.decoy_intensities[1]);
    const Intensity mu2(prot.decoy_intensities[2]);
    est.s1_lower = s1_lower_bound(rates, mu1, mu2, &est.s1_clamped);
    if (est.s1_lower <= 0.0) {
        // Nothing survives the yield bound; report the maximally pessimistic
        // error rate instead of dividing by zero.
        est.e1ph_upper = 0.5;
        est.e1ph_clamped = true;
    } else {
        est.e1ph_upper = e1ph_upper_bound(rates, mu1, est.s1_lower, &est.e1ph_clamped);
    }
    return est;
}

}  // namespace snsqkd
