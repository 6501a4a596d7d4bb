#include "snsqkd/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace snsqkd {

Intensity::Intensity(double value) : value_(value) {
    if (!std::isfinite(value) || value < 0.0)
        throw std::domain_error("intensity must be finite and >= 0, got " +
                                std::to_string(value));
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("binary_entropy argument outside [0,1]: " +
                                std::to_string(x));
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

PhotonNumberDistribution photon_number_probs(Intensity mu, int k_max) {
    if (k_max < 2) throw std::domain_error("photon_number_probs requires k_max >= 2");
    const double lam = 2.0 * mu.value();
    PhotonNumberDistribution d;
    d.prob.resize(static_cast<std::size_t>(k_max) + 1);
    double p = std::exp(-lam);  // p_0
    double sum = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        d.prob[static_cast<std::size_t>(k)] = p;
        sum += p;
        p *= lam / static_cast<double>(k + 1);
    }
    // p now holds p_{k_max+1}.  Bound the tail by the dominating geometric
    // series p_{k_max+1} * sum_j r^j with ratio r = lam/(k_max+2); valid (and
    // tight) only when r < 1.
    const double r = lam / static_cast<double>(k_max + 2);
    if (r >= 1.0)
        throw std::domain_error("photon_number_probs: k_max too small for intensity");
    d.truncation_tail = p / (1.0 - r);
    if (sum + d.truncation_tail > 1.0 + 1e-12)
        throw std::domain_error(
            "photon_number_probs: truncation bound too loose; increase k_max");
    return d;
}

bool phase_slice_accept(const PhasePair& phases, double lambda) {
    return 1.0 - std::abs(std::cos(phases.delta_a - phases.delta_b)) <= std::abs(lambda);
}

double phase_acceptance_fraction(double lambda) {
    const double l = std::abs(lambda);
    if (l >= 1.0) return 1.0;
    constexpr double pi = 3.14159265358979323846;
    // Accepted set: |delta| within acos(1-l) of 0 or of pi.
    return 2.0 * std::acos(1.0 - l) / pi;
}

InterferenceSign interference_sign(const PhasePair& phases) {
    return std::cos(phases.delta_b - phases.delta_a) >= 0.0 ? InterferenceSign::plus
                                                            : InterferenceSign::minus;
}

}  // namespace snsqkd
