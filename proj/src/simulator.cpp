#include "snsqkd/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace snsqkd {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

WindowRng::WindowRng(std::uint64_t seed, std::uint64_t window_index)
    // Hash the (seed, window) pair into an effectively random start state so
    // per-window streams are mutually independent and partition-invariant.
    : state_(mix64(seed + kGolden) ^ mix64((window_index + 1) * kGolden)) {}

std::uint64_t WindowRng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double WindowRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool WindowRng::bernoulli(double p) { return next_double() < p; }

int WindowRng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double product = 1.0;
    do {
        ++k;
        product *= next_double();
    } while (product > limit);
    return k - 1;
}

XBitClass classify_x_bit(const WindowRecord& record) {
    const bool one_click = record.outcome == WindowOutcome::left_only ||
                           record.outcome == WindowOutcome::right_only;
    if (record.kind != WindowKind::x || !record.accepted || !one_click)
        throw std::logic_error("classify_x_bit needs an accepted effective X window");
    const bool left = record.outcome == WindowOutcome::left_only;
    const bool plus = interference_sign(record.phases) == InterferenceSign::plus;
    return left == plus ? XBitClass::right : XBitClass::wrong;
}

ZBitClass classify_z_bit(const WindowRecord& record) {
    const bool one_click = record.outcome == WindowOutcome::left_only ||
                           record.outcome == WindowOutcome::right_only;
    if (record.kind != WindowKind::z || !one_click)
        throw std::logic_error("classify_z_bit needs an effective Z window");
    return record.a_sends != record.b_sends ? ZBitClass::correct : ZBitClass::error;
}

void TallySet::merge(const TallySet& other) {
    if (x.size() != other.x.size())
        throw std::invalid_argument("cannot merge tallies over different intensity sets");
    n_windows += other.n_windows;
    z_windows += other.z_windows;
    z_effective += other.z_effective;
    z_errors += other.z_errors;
    z1_windows += other.z1_windows;
    z1_effective += other.z1_effective;
    mismatched_windows += other.mismatched_windows;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i].windows += other.x[i].windows;
        x[i].accepted += other.x[i].accepted;
        x[i].effective += other.x[i].effective;
        x[i].errors += other.x[i].errors;
        x[i].n_plus_left += other.x[i].n_plus_left;
        x[i].n_minus_left += other.x[i].n_minus_left;
        x[i].n_plus_right += other.x[i].n_plus_right;
        x[i].n_minus_right += other.x[i].n_minus_right;
    }
    x1_accepted_windows += other.x1_accepted_windows;
    x1_effective += other.x1_effective;
    x1_errors += other.x1_errors;
}

namespace {

// Source photons -> thinning by eta -> per-photon port routing -> dark
// counts. Returns the outcome and stores the sampled source count.
WindowOutcome detect_routed(double source_mean, double eta, double p_left,
                            const ChannelParams& chan, WindowRng& rng,
                            int* source_photons) {
    const int k = rng.poisson(source_mean);
    *source_photons = k;
    int n_left = 0;
    int n_right = 0;
    for (int i = 0; i < k; ++i) {
        if (!rng.bernoulli(eta)) continue;
        if (rng.bernoulli(p_left))
            ++n_left;
        else
            ++n_right;
    }
    const bool click_l = n_left > 0 || rng.bernoulli(chan.dark_count_prob);
    const bool click_r = n_right > 0 || rng.bernoulli(chan.dark_count_prob);
    if (click_l && click_r) return WindowOutcome::both;
    if (click_l) return WindowOutcome::left_only;
    if (click_r) return WindowOutcome::right_only;
    return WindowOutcome::none;
}

WindowOutcome detect_poisson_pair(double mean_left, double mean_right,
                                  const ChannelParams& chan, WindowRng& rng) {
    const bool click_l = rng.poisson(mean_left) > 0 || rng.bernoulli(chan.dark_count_prob);
    const bool click_r = rng.poisson(mean_right) > 0 || rng.bernoulli(chan.dark_count_prob);
    if (click_l && click_r) return WindowOutcome::both;
    if (click_l) return WindowOutcome::left_only;
    if (click_r) return WindowOutcome::right_only;
    return WindowOutcome::none;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

WindowRecord simulate_window(const ProtocolParams& prot, const ChannelParams& chan,
                             WindowRng& rng) {
    WindowRecord rec;
    const std::size_t n_int = prot.decoy_intensities.size();

    const bool a_signal = rng.bernoulli(prot.q_signal);
    if (!a_signal) {
        // Decoy masses are equal, so the conditional intensity is uniform.
        const double u = rng.next_double();
        rec.a_intensity = static_cast<int>(u * static_cast<double>(n_int));
        if (rec.a_intensity >= static_cast<int>(n_int))
            rec.a_intensity = static_cast<int>(n_int) - 1;
    }
    const bool b_signal = rng.bernoulli(prot.q_signal);
    if (!b_signal) {
        const double u = rng.next_double();
        rec.b_intensity = static_cast<int>(u * static_cast<double>(n_int));
        if (rec.b_intensity >= static_cast<int>(n_int))
            rec.b_intensity = static_cast<int>(n_int) - 1;
    }

    const double eta = arm_transmittance(chan);
    const double ea = chan.misalignment;

    if (a_signal && b_signal) {
        rec.kind = WindowKind::z;
        rec.a_sends = rng.bernoulli(prot.epsilon);
        rec.b_sends = rng.bernoulli(prot.epsilon);
        if (rec.a_sends) rec.phases.delta_a = kTwoPi * rng.next_double();
        if (rec.b_sends) rec.phases.delta_b = kTwoPi * rng.next_double();
        if (rec.a_sends && rec.b_sends) {
            // Two independent coherent pulses: the interfered output modes
            // are independent Poisson sources; per-photon origin is not
            // defined, so the source count is left untracked.
            const double c = std::cos(rec.phases.delta_a - rec.phases.delta_b);
            const double shift = (1.0 - 2.0 * ea) * c;
            rec.outcome = detect_poisson_pair(eta * prot.mu_signal * (1.0 + shift),
                                              eta * prot.mu_signal * (1.0 - shift), chan,
                                              rng);
            rec.source_photons = -1;
        } else if (rec.a_sends || rec.b_sends) {
            // One pulse against vacuum splits evenly, misalignment or not.
            rec.outcome =
                detect_routed(prot.mu_signal, eta, 0.5, chan, rng, &rec.source_photons);
        } else {
            rec.outcome = detect_poisson_pair(0.0, 0.0, chan, rng);
            rec.source_photons = 0;
        }
        return rec;
    }

    if (!a_signal && !b_signal && rec.a_intensity == rec.b_intensity) {
        rec.kind = WindowKind::x;
        rec.phases.delta_a = kTwoPi * rng.next_double();
        rec.phases.delta_b = kTwoPi * rng.next_double();
        rec.accepted = phase_slice_accept(rec.phases, prot.lambda);
        if (!rec.accepted) {
            rec.source_photons = -1;  // discarded before measurement matters
            return rec;
        }
        const double mu = prot.decoy_intensities[static_cast<std::size_t>(rec.a_intensity)];
        const double c = std::cos(rec.phases.delta_a - rec.phases.delta_b);
        const double p_left = 0.5 * (1.0 + (1.0 - 2.0 * ea) * c);
        rec.outcome = detect_routed(2.0 * mu, eta, p_left, chan, rng, &rec.source_photons);
        return rec;
    }

    rec.kind = WindowKind::mismatched;
    rec.source_photons = -1;
    return rec;
}

TallySet run_protocol(const ProtocolParams& prot, const ChannelParams& chan,
                      std::uint64_t n_windows, std::uint64_t seed,
                      std::uint64_t first_window) {
    prot.validate();
    chan.validate();
    if (n_windows < 1) throw std::domain_error("n_windows must be >= 1");

    TallySet t;
    t.x.resize(prot.decoy_intensities.size());

    for (std::uint64_t w = first_window; w < first_window + n_windows; ++w) {
        WindowRng rng(seed, w);
        const WindowRecord rec = simulate_window(prot, chan, rng);
        ++t.n_windows;
        const bool one_click = rec.outcome == WindowOutcome::left_only ||
                               rec.outcome == WindowOutcome::right_only;
        switch (rec.kind) {
            case WindowKind::z: {
                ++t.z_windows;
                const bool one_sender = rec.a_sends != rec.b_sends;
                if (one_sender && rec.source_photons == 1) ++t.z1_windows;
                if (one_click) {
                    ++t.z_effective;
                    if (classify_z_bit(rec) == ZBitClass::error) ++t.z_errors;
                    if (one_sender && rec.source_photons == 1) ++t.z1_effective;
                }
                break;
            }
            case WindowKind::x: {
                IntensityTally& it = t.x[static_cast<std::size_t>(rec.a_intensity)];
                ++it.windows;
                if (!rec.accepted) break;
                ++it.accepted;
                const bool single = rec.source_photons == 1;
                if (single) ++t.x1_accepted_windows;
                if (!one_click) break;
                ++it.effective;
                const bool wrong = classify_x_bit(rec) == XBitClass::wrong;
                if (wrong) ++it.errors;
                const bool plus =
                    interference_sign(rec.phases) == InterferenceSign::plus;
                const bool left = rec.outcome == WindowOutcome::left_only;
                if (plus && left) ++it.n_plus_left;
                if (plus && !left) ++it.n_plus_right;
                if (!plus && left) ++it.n_minus_left;
                if (!plus && !left) ++it.n_minus_right;
                if (single) {
                    ++t.x1_effective;
                    if (wrong) ++t.x1_errors;
                }
                break;
            }
            case WindowKind::mismatched:
                ++t.mismatched_windows;
                break;
        }
    }
    return t;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

ObservedRates rates_from_tallies(const TallySet& tallies, const ProtocolParams& prot) {
    if (tallies.x.size() != prot.decoy_intensities.size())
        throw std::invalid_argument("tally intensity count does not match protocol");
    ObservedRates r;
    r.intensities = prot.decoy_intensities;
    r.s0 = ratio(tallies.x[0].effective, tallies.x[0].accepted);
    for (const IntensityTally& it : tallies.x) {
        r.s_mu.push_back(ratio(it.effective, it.accepted));
        r.e_mu_x.push_back(ratio(it.errors, it.effective));
    }
    r.s_z = ratio(tallies.z_effective, tallies.z_windows);
    r.e_z = ratio(tallies.z_errors, tallies.z_effective);
    r.n_t_per_window = r.s_z;
    r.s1_true = ratio(tallies.z1_effective, tallies.z1_windows);
    r.e1x_true = ratio(tallies.x1_errors, tallies.x1_effective);
    return r;
}

namespace {

RateComparison compare_one(std::string name, double analytic, std::uint64_t numerator,
                           std::uint64_t denominator) {
    RateComparison c;
    c.name = std::move(name);
    c.analytic = analytic;
    c.denominator = denominator;
    c.empirical = ratio(numerator, denominator);
    c.comparable = denominator > 0 && analytic > 0.0 && analytic < 1.0;
    if (c.comparable) {
        c.standard_error =
            std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(denominator));
        c.z_score = (c.empirical - c.analytic) / c.standard_error;
    }
    return c;
}

std::string mu_label(const char* base, double mu) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s[mu=%g]", base, mu);
    return buf;
}

}  // namespace

std::vector<RateComparison> compare_rates(const TallySet& tallies,
                                          const ObservedRates& analytic,
                                          const ProtocolParams& prot) {
    if (tallies.x.size() != prot.decoy_intensities.size())
        throw std::invalid_argument("tally intensity count does not match protocol");
    std::vector<RateComparison> rows;
    rows.push_back(compare_one("s0", analytic.s0, tallies.x[0].effective,
                               tallies.x[0].accepted));
    for (std::size_t j = 0; j < tallies.x.size(); ++j) {
        const double mu = prot.decoy_intensities[j];
        if (j > 0)
            rows.push_back(compare_one(mu_label("s_mu", mu), analytic.s_mu[j],
                                       tallies.x[j].effective, tallies.x[j].accepted));
        rows.push_back(compare_one(mu_label("e_mu_x", mu), analytic.e_mu_x[j],
                                   tallies.x[j].errors, tallies.x[j].effective));
    }
    rows.push_back(
        compare_one("s_z", analytic.s_z, tallies.z_effective, tallies.z_windows));
    rows.push_back(
        compare_one("e_z", analytic.e_z, tallies.z_errors, tallies.z_effective));
    rows.push_back(compare_one("s1_true", analytic.s1_true, tallies.z1_effective,
                               tallies.z1_windows));
    rows.push_back(compare_one("e1x_true", analytic.e1x_true, tallies.x1_errors,
                               tallies.x1_effective));

    // Structural cross-checks: single-photon weight of one-sender Z windows
    // and the phase-slice acceptance fraction.
    const double z1_frac = 2.0 * prot.epsilon * (1.0 - prot.epsilon) *
                           prot.mu_signal * std::exp(-prot.mu_signal);
    rows.push_back(
        compare_one("z1_window_fraction", z1_frac, tallies.z1_windows, tallies.z_windows));
    const double accept = phase_acceptance_fraction(prot.lambda);
    for (std::size_t j = 0; j < tallies.x.size(); ++j)
        rows.push_back(compare_one(mu_label("x_accept_fraction", prot.decoy_intensities[j]),
                                   accept, tallies.x[j].accepted, tallies.x[j].windows));
    return rows;
}

}  // namespace snsqkd
