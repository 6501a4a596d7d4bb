#include "snsqkd/attack.hpp"

#include <cmath>
#include <stdexcept>

#include "snsqkd/simulator.hpp"

namespace snsqkd::attack {

namespace {

constexpr double kTailThreshold = 1e-12;

std::size_t ancilla_index(const FockVector& v) {
    return static_cast<std::size_t>(v.k_max) + 1;
}

FockVector normalized_or_zero(FockVector v, double weight) {
    if (weight <= 0.0) {
        for (auto& a : v.amp) a = 0.0;
        return v;
    }
    const double inv = 1.0 / std::sqrt(weight);
    for (auto& a : v.amp) a *= inv;
    return v;
}

}  // namespace

double FockVector::norm2() const {
    double s = 0.0;
    for (const auto& a : amp) s += std::norm(a);
    return s;
}

FockVector make_fock_vector(int k_max) {
    if (k_max < 2) throw std::domain_error("k_max must be >= 2");
    FockVector v;
    v.k_max = k_max;
    v.amp.assign(static_cast<std::size_t>(k_max) + 2, 0.0);
    return v;
}

std::complex<double> inner_product(const FockVector& a, const FockVector& b) {
    if (a.k_max != b.k_max)
        throw std::invalid_argument("inner product needs matching truncations");
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s;
}

FockVector incident_state(int bit, DetectorBranch branch, Intensity mu, double rho,
                          int k_max) {
    if (bit != 0 && bit != 1) throw std::domain_error("bit must be 0 or 1");
    if (mu.value() <= 0.0) throw std::domain_error("incident state needs mu > 0");
    FockVector v = make_fock_vector(k_max);
    if (branch == DetectorBranch::d1) {
        v.amp[0] = 1.0;  // the interference cancels: vacuum leaves this port
        return v;
    }

    const std::complex<double> alpha =
        (bit == 0 ? 1.0 : -1.0) * std::sqrt(2.0 * mu.value()) *
        std::exp(std::complex<double>(0.0, rho));
    // c_k = e^{-|alpha|^2/2} alpha^k / sqrt(k!)
    std::complex<double> c = std::exp(-0.5 * std::norm(alpha));
    v.amp[0] = c;
    for (int k = 1; k <= k_max; ++k) {
        c *= alpha / std::sqrt(static_cast<double>(k));
        v.amp[static_cast<std::size_t>(k)] = c;
    }
    const double tail = 1.0 - v.norm2();
    if (tail > kTailThreshold)
        throw std::domain_error("coherent-state truncation tail too large; raise k_max");
    return v;
}

std::pair<FockVector, double> project_nonvacuum(const FockVector& state) {
    FockVector v = state;
    v.amp[0] = 0.0;
    const double acceptance = v.norm2();
    return {normalized_or_zero(std::move(v), acceptance), acceptance};
}

std::pair<FockVector, double> project_S12(const FockVector& state) {
    FockVector v = make_fock_vector(state.k_max);
    v.amp[1] = state.amp[1];
    v.amp[2] = state.amp[2];
    const double acceptance = v.norm2();
    return {normalized_or_zero(std::move(v), acceptance), acceptance};
}

std::pair<FockVector, double> filter_unitary_and_project(const FockVector& state,
                                                         Intensity mu) {
    const double m = mu.value();
    if (m > 1.0)
        throw std::domain_error("filter map needs mu <= 1 to extend to a unitary");
    FockVector v = state;
    const std::size_t anc = ancilla_index(v);
    const std::complex<double> one = v.amp[1];
    const std::complex<double> m0 = v.amp[anc];
    // Rotation on span{|1>, |m0>} (identity elsewhere), then the projection
    // discards whatever the rotation moved onto |m0>.
    v.amp[1] = std::sqrt(m) * one - std::sqrt(1.0 - m) * m0;
    v.amp[anc] = 0.0;
    const double acceptance = v.norm2();
    return {normalized_or_zero(std::move(v), acceptance), acceptance};
}

FockVector phase_unwind(const FockVector& state, double rho) {
    for (std::size_t k = 0; k < state.amp.size(); ++k) {
        if (k == 1 || k == 2) continue;
        if (std::abs(state.amp[k]) > 1e-12)
            throw std::domain_error("phase unwind needs support on {|1>, |2>} only");
    }
    FockVector v = state;
    v.amp[2] *= std::exp(std::complex<double>(0.0, -rho));
    return v;
}

AttackTrace trace_pipeline(int bit, Intensity mu, double rho, int k_max) {
    AttackTrace tr;
    const FockVector psi0 = incident_state(bit, DetectorBranch::d0, mu, rho, k_max);
    auto [psi1, acc1] = project_nonvacuum(psi0);
    auto [psi2, acc2] = project_S12(psi1);
    auto [psi4, acc4] = filter_unitary_and_project(psi2, mu);
    tr.psi1 = std::move(psi1);
    tr.psi2 = std::move(psi2);
    tr.psi4 = std::move(psi4);
    tr.psi5 = phase_unwind(tr.psi4, rho);
    tr.acceptance_nonvacuum = acc1;
    tr.acceptance_s12 = acc2;
    tr.acceptance_filter = acc4;
    tr.heralding = acc1 * acc2 * acc4;
    // Projective measurement in the (|1> +- |2>)/sqrt(2) basis.
    const std::complex<double> plus =
        (tr.psi5.amp[1] + tr.psi5.amp[2]) / std::sqrt(2.0);
    const std::complex<double> minus =
        (tr.psi5.amp[1] - tr.psi5.amp[2]) / std::sqrt(2.0);
    tr.discriminated_bit = std::norm(plus) >= std::norm(minus) ? 0 : 1;
    tr.declared =
        tr.discriminated_bit == 0 ? DetectorBranch::d0 : DetectorBranch::d1;
    return tr;
}

AttackSummary run_attack(Intensity mu, double rho, std::uint64_t trials,
                         std::uint64_t seed, int k_max) {
    if (trials < 1) throw std::domain_error("run_attack needs trials >= 1");
    const double m = mu.value();

    AttackSummary s;
    s.mu = m;
    s.rho = rho;
    s.trials = trials;
    s.heralding_analytic = 4.0 * m * m * std::exp(-2.0 * m);

    // The per-bit pipelines are deterministic; compute them once and sample
    // acceptance/measurement outcomes per trial.
    const AttackTrace tr0 = trace_pipeline(0, mu, rho, k_max);
    const AttackTrace tr1 = trace_pipeline(1, mu, rho, k_max);
    s.heralding_analytic_bit0 = tr0.heralding;
    s.heralding_analytic_bit1 = tr1.heralding;
    s.psi5_inner_product = std::abs(inner_product(tr0.psi5, tr1.psi5));
    s.single_photon_fraction = std::norm(tr0.psi5.amp[1]);
    // Tagged-bit accounting sees half the heralded bits as single photons
    // with zero observed error, and would keep that fraction as key.
    s.naive_key_fraction = s.single_photon_fraction * (1.0 - binary_entropy(0.0));
    s.eve_information_bits = 1.0;

    std::uint64_t correct = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        WindowRng rng(seed, t);
        const int bit = rng.bernoulli(0.5) ? 1 : 0;
        const AttackTrace& tr = bit == 0 ? tr0 : tr1;
        (bit == 0 ? s.trials_bit0 : s.trials_bit1) += 1;
        const bool accepted = rng.bernoulli(tr.acceptance_nonvacuum) &&
                              rng.bernoulli(tr.acceptance_s12) &&
                              rng.bernoulli(tr.acceptance_filter);
        if (!accepted) continue;  // Eve announces no detection
        s.accepted_trials += 1;
        (bit == 0 ? s.accepted_bit0 : s.accepted_bit1) += 1;
        // Measurement in the (|1> +- |2>)/sqrt(2) basis.
        const double p_plus =
            std::norm((tr.psi5.amp[1] + tr.psi5.amp[2]) / std::sqrt(2.0));
        const int guess = rng.bernoulli(p_plus) ? 0 : 1;
        if (guess == bit) ++correct;
    }
    s.heralding_empirical =
        static_cast<double>(s.accepted_trials) / static_cast<double>(trials);
    s.heralding_empirical_bit0 =
        s.trials_bit0 > 0
            ? static_cast<double>(s.accepted_bit0) / static_cast<double>(s.trials_bit0)
            : 0.0;
    s.heralding_empirical_bit1 =
        s.trials_bit1 > 0
            ? static_cast<double>(s.accepted_bit1) / static_cast<double>(s.trials_bit1)
            : 0.0;
    s.discrimination_accuracy =
        s.accepted_trials > 0
            ? static_cast<double>(correct) / static_cast<double>(s.accepted_trials)
            : 0.0;
    return s;
}

}  // namespace snsqkd::attack
