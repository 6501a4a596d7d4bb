#pragma once

#include <vector>

namespace snsqkd {

// Mean photon-pair intensity of a matched two-mode source. Non-negative and
// finite by construction; throws std::domain_error otherwise.
class Intensity {
public:
    explicit Intensity(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

// Binary entropy in bits: H(x) = -x log2 x - (1-x) log2 (1-x), with
// H(0) = H(1) = 0. Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

// A pair of encoding phases, one per party, in radians ([0, 2*pi) by
// convention; any real value is handled).
struct PhasePair {
    double delta_a = 0.0;
    double delta_b = 0.0;
};

// Truncated photon-number distribution of the matched-intensity two-mode
// source: prob[k] = e^(-2*mu) * (2*mu)^k / k!.  truncation_tail is a rigorous
// upper bound on the omitted mass, so sum(prob) + truncation_tail >= 1.
struct PhotonNumberDistribution {
    std::vector<double> prob;
    double truncation_tail = 0.0;
};

// Throws std::domain_error when k_max < 2 or when k_max is too small for the
// requested intensity to keep sum + tail within 1e-12 of unity.
PhotonNumberDistribution photon_number_probs(Intensity mu, int k_max = 40);

// Post-selection slice for matched-basis windows:
// accept iff 1 - |cos(delta_a - delta_b)| <= |lambda|.
bool phase_slice_accept(const PhasePair& phases, double lambda);

// Fraction of a uniformly random phase difference that the slice accepts:
// 2*acos(1-|lambda|)/pi for |lambda| < 1, else 1.
double phase_acceptance_fraction(double lambda);

// Sign class of an accepted window: plus when cos(delta_b - delta_a) >= 0.
enum class InterferenceSign { plus, minus };
InterferenceSign interference_sign(const PhasePair& phases);

}  // namespace snsqkd
