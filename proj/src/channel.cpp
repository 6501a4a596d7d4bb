#include "snsqkd/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace snsqkd {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::domain_error(msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void ChannelParams::validate() const {
    require(finite(distance_km) && distance_km >= 0.0, "distance_km must be >= 0");
    require(finite(attenuation_db_per_km) && attenuation_db_per_km >= 0.0,
            "attenuation_db_per_km must be >= 0");
    require(finite(detector_efficiency) && detector_efficiency > 0.0 &&
                detector_efficiency <= 1.0,
            "detector_efficiency must be in (0, 1]");
    require(finite(dark_count_prob) && dark_count_prob >= 0.0 && dark_count_prob < 1.0,
            "dark_count_prob must be in [0, 1)");
    require(finite(misalignment) && misalignment >= 0.0 && misalignment <= 0.5,
            "misalignment must be in [0, 0.5]");
}

void ProtocolParams::validate() const {
    require(finite(epsilon) && epsilon >= 0.0 && epsilon <= 1.0,
            "epsilon must be in [0, 1]");
    require(finite(mu_signal) && mu_signal >= 0.0, "mu_signal must be >= 0");
    require(!decoy_intensities.empty(), "decoy_intensities must be non-empty");
    require(decoy_intensities.front() == 0.0,
            "decoy_intensities must start with the vacuum intensity 0");
    for (std::size_t i = 0; i < decoy_intensities.size(); ++i) {
        require(finite(decoy_intensities[i]) && decoy_intensities[i] >= 0.0,
                "decoy intensities must be finite and >= 0");
        if (i > 0)
            require(decoy_intensities[i] > decoy_intensities[i - 1],
                    "decoy_intensities must be strictly ascending");
    }
    require(finite(lambda) && lambda > 0.0 && lambda <= 1.0,
            "lambda must be in (0, 1]");
    require(finite(q_signal) && q_signal > 0.0 && q_signal < 1.0,
            "q_signal must be in (0, 1)");
    require(finite(f_error_correction) && f_error_correction >= 1.0,
            "f_error_correction must be >= 1");
}

std::vector<double> ProtocolParams::q_decoy() const {
    std::vector<double> q(decoy_intensities.size(),
                          (1.0 - q_signal) / static_cast<double>(decoy_intensities.size()));
    return q;
}

double arm_transmittance(const ChannelParams& p) {
    return p.detector_efficiency *
           std::pow(10.0, -p.attenuation_db_per_km * (p.distance_km / 2.0) / 10.0);
}

ClickProbabilities click_probabilities(double intensity_left, double intensity_right,
                                       const ChannelParams& p) {
    const double ea = p.misalignment;
    const double il = (1.0 - ea) * intensity_left + ea * intensity_right;
    const double ir = (1.0 - ea) * intensity_right + ea * intensity_left;
    const double pd = p.dark_count_prob;
    // P(click) = 1 - (1-pd) e^{-I}; written via expm1 so small intensities do
    // not cancel against 1.
    const double click_l = pd + (1.0 - pd) * (-std::expm1(-il));
    const double click_r = pd + (1.0 - pd) * (-std::expm1(-ir));
    ClickProbabilities cp;
    cp.left_only = click_l * (1.0 - click_r);
    cp.right_only = click_r * (1.0 - click_l);
    cp.both = click_l * click_r;
    cp.none = (1.0 - click_l) * (1.0 - click_r);
    return cp;
}

namespace {

double one_click_prob(double intensity_left, double intensity_right,
                      const ChannelParams& p) {
    const ClickProbabilities cp = click_probabilities(intensity_left, intensity_right, p);
    return cp.left_only + cp.right_only;
}

// Average of the one-click probability over the uniform unannounced phase
// difference of a both-send window: output intensities I (1 +- cos theta).
// The integrand is smooth and 2pi-periodic, so uniform trapezoid sampling
// converges spectrally; double the grid until two passes agree.
double both_send_one_click_avg(double interfered_intensity, const ChannelParams& p) {
    const double intensity = interfered_intensity;
    auto f = [&](double theta) {
        const double c = std::cos(theta);
        return one_click_prob(intensity * (1.0 + c), intensity * (1.0 - c), p);
    };
    int n = 16;
    const double pi = std::acos(-1.0);
    auto trapezoid = [&](int points) {
        double sum = 0.5 * (f(0.0) + f(pi));
        for (int i = 1; i < points; ++i) sum += f(pi * i / points);
        return sum / points;
    };
    double prev = trapezoid(n);
    for (int pass = 0; pass < 16; ++pass) {
        n *= 2;
        const double cur = trapezoid(n);
        if (std::abs(cur - prev) <= 1e-13 * std::max(std::abs(cur), 1e-30)) return cur;
        prev = cur;
    }
    throw std::runtime_error("phase-average integration did not converge");
}

}  // namespace

ObservedRates analytic_rates(const ProtocolParams& prot, const ChannelParams& chan) {
    prot.validate();
    chan.validate();

    const double eta = arm_transmittance(chan);
    const double eps = prot.epsilon;
    const double mu_sig = prot.mu_signal;

    ObservedRates r;
    r.intensities = prot.decoy_intensities;

    // Vacuum-window effective-click rate: exactly one of two dark counts.
    r.s0 = one_click_prob(0.0, 0.0, chan);

    // X windows: both parties send the same intensity; after the phase slice
    // (vanishing-width limit) the pulses arrive in phase, so all light exits
    // one port: intensities (2 eta mu, 0). A click on the other port is a bit
    // error.
    for (double mu : prot.decoy_intensities) {
        const ClickProbabilities cp = click_probabilities(2.0 * eta * mu, 0.0, chan);
        const double one = cp.left_only + cp.right_only;
        r.s_mu.push_back(one);
        r.e_mu_x.push_back(one > 0.0 ? cp.right_only / one : 0.0);
    }

    // Z windows: compose the three send-decision branches.
    const double p_neither = (1.0 - eps) * (1.0 - eps);
    const double p_one = 2.0 * eps * (1.0 - eps);
    const double p_both = eps * eps;
    const double one_send = one_click_prob(eta * mu_sig / 2.0, eta * mu_sig / 2.0, chan);
    const double both_send =
        p_both > 0.0 ? both_send_one_click_avg(eta * mu_sig, chan) : 0.0;
    r.s_z = p_neither * r.s0 + p_one * one_send + p_both * both_send;
    // One-sender events always produce matching bits; neither- and both-send
    // effective windows are always errors.
    const double err_mass = p_neither * r.s0 + p_both * both_send;
    r.e_z = r.s_z > 0.0 ? err_mass / r.s_z : 0.0;
    r.n_t_per_window = r.s_z;

    // Tagged single-photon ground truth. A lone photon (transmittance eta,
    // detector efficiency included) either reaches a detector, which then
    // clicks for sure, or is lost, leaving only dark counts.
    const double pd = chan.dark_count_prob;
    r.s1_true = eta * (1.0 - pd) + (1.0 - eta) * 2.0 * pd * (1.0 - pd);
    const double e1_num =
        chan.misalignment * eta * (1.0 - pd) + (1.0 - eta) * pd * (1.0 - pd);
    r.e1x_true = r.s1_true > 0.0 ? e1_num / r.s1_true : 0.0;

    return r;
}

}  // namespace snsqkd
