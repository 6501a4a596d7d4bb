#include "snsqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace snsqkd {

double rate_per_window_raw(const ProtocolParams& prot, const ObservedRates& rates,
                           const DecoyEstimate& estimate) {
    const double eps = prot.epsilon;
    const double mu = prot.mu_signal;
    const double untagged = 2.0 * eps * (1.0 - eps) * mu * std::exp(-mu) * estimate.s1() *
                            (1.0 - binary_entropy(estimate.e1ph_upper));
    const double leakage =
        rates.s_z * prot.f_error_correction * binary_entropy(rates.e_z);
    return untagged - leakage;
}

double rate_per_window(const ProtocolParams& prot, const ObservedRates& rates,
                       const DecoyEstimate& estimate, bool* clamped) {
    const double raw = rate_per_window_raw(prot, rates, estimate);
    if (clamped) *clamped = raw < 0.0;
    return std::max(0.0, raw);
}

double final_key_length(double n1, double e1ph, double n_t, double e_z, double f) {
    if (n1 < 0.0 || n_t < 0.0)
        throw std::domain_error("final key length needs non-negative counts");
    const double raw = n1 * (1.0 - binary_entropy(e1ph)) - n_t * f * binary_entropy(e_z);
    return std::max(0.0, raw);
}

KeyRateReport evaluate_rates(const ProtocolParams& prot, const ChannelParams& chan,
                             const ObservedRates& rates, DecoyMode mode,
                             double n_windows) {
    KeyRateReport rep;
    rep.protocol = prot;
    rep.channel = chan;
    rep.rates = rates;
    rep.estimate = estimate_single_photon(rates, prot, mode);
    rep.flags.s1_clamped = rep.estimate.s1_clamped;
    rep.flags.e1ph_clamped = rep.estimate.e1ph_clamped;
    rep.rate_raw = rate_per_window_raw(prot, rates, rep.estimate);
    rep.rate_per_window = rate_per_window(prot, rates, rep.estimate, &rep.flags.rate_clamped);
    rep.optimized_epsilon = prot.epsilon;
    rep.optimized_mu_signal = prot.mu_signal;
    if (n_windows > 0.0) {
        rep.n_windows = n_windows;
        rep.n_z_windows = n_windows * prot.q_signal * prot.q_signal;
        rep.estimate.n1 = n1_estimate(prot, rep.estimate.s1(), rep.n_z_windows);
        rep.n_t = rep.n_z_windows * rates.n_t_per_window;
        rep.final_key_length = final_key_length(rep.estimate.n1, rep.estimate.e1ph_upper,
                                                rep.n_t, rates.e_z,
                                                prot.f_error_correction);
    }
    return rep;
}

KeyRateReport evaluate(const ProtocolParams& prot, const ChannelParams& chan,
                       DecoyMode mode, double n_windows) {
    return evaluate_rates(prot, chan, analytic_rates(prot, chan), mode, n_windows);
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    const double step = (std::log(hi) - std::log(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) g.push_back(std::exp(std::log(lo) + step * i));
    return g;
}

// The raw rate as a function of the two optimized coordinates, everything
// else fixed.
double raw_rate_at(ProtocolParams prot, const ChannelParams& chan, DecoyMode mode,
                   double epsilon, double mu_signal) {
    prot.epsilon = epsilon;
    prot.mu_signal = mu_signal;
    const ObservedRates rates = analytic_rates(prot, chan);
    const DecoyEstimate est = estimate_single_photon(rates, prot, mode);
    return rate_per_window_raw(prot, rates, est);
}

// Golden-section maximization in log space over [lo, hi]; keeps the best of
// everything it evaluates. Relative parameter tolerance 1e-4.
void refine_coordinate(const std::function<double(double)>& f, double lo, double hi,
                       double* best_x, double* best_f) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = std::log(lo);
    double b = std::log(hi);
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(std::exp(x1));
    double f2 = f(std::exp(x2));
    auto consider = [&](double x, double val) {
        if (val > *best_f) {
            *best_f = val;
            *best_x = std::exp(x);
        }
    };
    consider(x1, f1);
    consider(x2, f2);
    while (b - a > 1e-4) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(std::exp(x2));
            consider(x2, f2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(std::exp(x1));
            consider(x1, f1);
        }
    }
}

}  // namespace

KeyRateReport optimize(const ChannelParams& chan, const ProtocolParams& prot_template,
                       DecoyMode mode, double n_windows, bool fix_epsilon,
                       bool fix_mu_signal) {
    prot_template.validate();
    chan.validate();

    // At large misalignment the optimum sits at very small epsilon (the
    // both-send error term dominates otherwise), so the grid extends well
    // below 1e-2.
    const std::vector<double> eps_grid =
        fix_epsilon ? std::vector<double>{prot_template.epsilon}
                    : log_grid(1e-5, 0.5, 48);
    const std::vector<double> mu_grid =
        fix_mu_signal ? std::vector<double>{prot_template.mu_signal}
                      : log_grid(0.01, 1.0, 32);

    double best_raw = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        for (std::size_t j = 0; j < mu_grid.size(); ++j) {
            const double raw =
                raw_rate_at(prot_template, chan, mode, eps_grid[i], mu_grid[j]);
            if (raw > best_raw) {
                best_raw = raw;
                best_i = i;
                best_j = j;
            }
        }
    }

    ProtocolParams prot = prot_template;
    if (best_raw <= 0.0) {
        // Nothing positive anywhere: report the first grid point, clamped.
        prot.epsilon = eps_grid.front();
        prot.mu_signal = mu_grid.front();
        KeyRateReport rep = evaluate(prot, chan, mode, n_windows);
        rep.flags.all_zero_landscape = true;
        return rep;
    }

    double best_eps = eps_grid[best_i];
    double best_mu = mu_grid[best_j];
    for (int round = 0; round < 4; ++round) {
        const double before = best_raw;
        if (!fix_epsilon) {
            const double lo = eps_grid[best_i > 0 ? best_i - 1 : 0];
            const double hi = eps_grid[std::min(best_i + 1, eps_grid.size() - 1)];
            refine_coordinate(
                [&](double e) { return raw_rate_at(prot_template, chan, mode, e, best_mu); },
                lo, hi, &best_eps, &best_raw);
        }
        if (!fix_mu_signal) {
            const double lo = mu_grid[best_j > 0 ? best_j - 1 : 0];
            const double hi = mu_grid[std::min(best_j + 1, mu_grid.size() - 1)];
            refine_coordinate(
                [&](double m) { return raw_rate_at(prot_template, chan, mode, best_eps, m); },
                lo, hi, &best_mu, &best_raw);
        }
        if (best_raw - before <= 1e-4 * std::abs(best_raw)) break;
    }

    prot.epsilon = best_eps;
    prot.mu_signal = best_mu;
    return evaluate(prot, chan, mode, n_windows);
}

std::vector<ScanPoint> scan(ScanAxis axis, double start, double stop, double step,
                            const ChannelParams& chan_template,
                            const ProtocolParams& prot_template, DecoyMode mode) {
    if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start)
        throw std::domain_error("scan grid needs start <= stop and step > 0");
    std::vector<ScanPoint> points;
    for (double v = start; v <= stop + 1e-9 * step; v += step) {
        ChannelParams chan = chan_template;
        if (axis == ScanAxis::distance)
            chan.distance_km = v;
        else
            chan.misalignment = v;
        ScanPoint p;
        p.axis_value = v;
        p.report = optimize(chan, prot_template, mode);
        points.push_back(std::move(p));
    }
    return points;
}

namespace {

bool secure_at(double d, const ChannelParams& chan_template,
               const ProtocolParams& prot_template, DecoyMode mode) {
    ChannelParams chan = chan_template;
    chan.distance_km = d;
    return optimize(chan, prot_template, mode).rate_per_window > 1e-12;
}

}  // namespace

double secure_distance_km(const ChannelParams& chan_template,
                          const ProtocolParams& prot_template, DecoyMode mode,
                          double d_lo, double d_hi) {
    if (!(d_lo >= 0.0) || !(d_hi > d_lo))
        throw std::domain_error("secure distance needs 0 <= d_lo < d_hi");
    if (!secure_at(d_lo, chan_template, prot_template, mode)) return d_lo;

    double lo = d_lo;  // known secure
    double hi = d_hi;  // candidate insecure
    bool found_insecure = false;
    for (double d = d_lo + 50.0; d < d_hi; d += 50.0) {
        if (secure_at(d, chan_template, prot_template, mode)) {
            lo = d;
        } else {
            hi = d;
            found_insecure = true;
            break;
        }
    }
    if (!found_insecure) {
        if (secure_at(d_hi, chan_template, prot_template, mode)) return d_hi;
        hi = d_hi;
    }
    while (hi - lo > 1.0) {
        const double mid = 0.5 * (lo + hi);
        if (secure_at(mid, chan_template, prot_template, mode))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace snsqkd
