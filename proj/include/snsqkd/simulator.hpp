#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snsqkd/channel.hpp"
#include "snsqkd/core.hpp"

namespace snsqkd {

enum class WindowKind { z, x, mismatched };
enum class WindowOutcome { none, left_only, right_only, both };
enum class XBitClass { right, wrong };
enum class ZBitClass { correct, error };

// Full description of one simulated time window. `source_photons` is the
// sampled total photon number leaving the sources (ground truth for the
// single-photon tags). It is -1 where the count is not tracked: both-send Z
// windows (detector counts are drawn directly as independent Poissons, so
// per-photon provenance is undefined), slice-rejected X windows and
// mismatched windows (physics not sampled; the protocol discards them).
struct WindowRecord {
    WindowKind kind = WindowKind::mismatched;
    int a_intensity = -1;  // index into decoy_intensities; -1 = signal declaration
    int b_intensity = -1;
    bool a_sends = false;  // Z windows only
    bool b_sends = false;
    PhasePair phases{0.0, 0.0};
    int source_photons = 0;
    WindowOutcome outcome = WindowOutcome::none;
    bool accepted = false;  // X windows: phase-slice predicate on declared phases
};

// Deterministic per-window random stream: a splitmix64 sequence whose start
// state is derived by hashing (seed, window index), so any partition of the
// window range reproduces the same per-window draws.
class WindowRng {
  public:
    WindowRng(std::uint64_t seed, std::uint64_t window_index);

    std::uint64_t next_u64();
    double next_double();  // uniform [0, 1)
    bool bernoulli(double p);
    int poisson(double mean);

  private:
    std::uint64_t state_;
};

// Counters for X windows of one decoy intensity. `windows` counts every X
// window of this intensity, `accepted` those passing the phase slice,
// `effective` the accepted one-click windows, `errors` the wrong-detector
// subset. The n_{sign,port} fields partition `effective` by the sign of
// cos(delta_a - delta_b) and the clicking detector.
struct IntensityTally {
    std::uint64_t windows = 0;
    std::uint64_t accepted = 0;
    std::uint64_t effective = 0;
    std::uint64_t errors = 0;
    std::uint64_t n_plus_left = 0;
    std::uint64_t n_minus_left = 0;
    std::uint64_t n_plus_right = 0;
    std::uint64_t n_minus_right = 0;
};

struct TallySet {
    std::uint64_t n_windows = 0;
    std::uint64_t z_windows = 0;
    std::uint64_t z_effective = 0;
    std::uint64_t z_errors = 0;
    std::uint64_t z1_windows = 0;    // one sender, exactly one source photon
    std::uint64_t z1_effective = 0;
    std::uint64_t mismatched_windows = 0;
    std::vector<IntensityTally> x;   // one entry per decoy intensity
    std::uint64_t x1_accepted_windows = 0;  // accepted X windows with one source photon
    std::uint64_t x1_effective = 0;
    std::uint64_t x1_errors = 0;

    // Field-wise addition; both operands must cover the same intensity set.
    void merge(const TallySet& other);
};

// Bit classification of effective events. Both throw std::logic_error when
// the record does not satisfy the documented precondition.
XBitClass classify_x_bit(const WindowRecord& record);   // accepted effective X window
ZBitClass classify_z_bit(const WindowRecord& record);   // effective Z window

// Samples one window using the stream `rng` (declarations, send decisions,
// phases, source statistics, transmission thinning, interference routing,
// dark counts).
WindowRecord simulate_window(const ProtocolParams& prot, const ChannelParams& chan,
                             WindowRng& rng);

// Runs windows [first_window, first_window + n_windows) and accumulates
// tallies. Deterministic in (params, seed, window indices) and independent of
// partitioning: run_protocol(.., n, seed) equals the merge of
// run_protocol(.., k, seed, 0) and run_protocol(.., n-k, seed, k).
TallySet run_protocol(const ProtocolParams& prot, const ChannelParams& chan,
                      std::uint64_t n_windows, std::uint64_t seed,
                      std::uint64_t first_window = 0);

// Empirical ObservedRates from tallies (ratio estimators; 0 when the
// denominator is 0). Intensities are echoed from the protocol.
ObservedRates rates_from_tallies(const TallySet& tallies, const ProtocolParams& prot);

// One analytic-vs-empirical comparison row. `comparable` is false when no
// standard error exists (zero denominator, or analytic value 0 or 1).
struct RateComparison {
    std::string name;
    double analytic = 0.0;
    double empirical = 0.0;
    std::uint64_t denominator = 0;
    double standard_error = 0.0;
    double z_score = 0.0;
    bool comparable = false;
};

std::vector<RateComparison> compare_rates(const TallySet& tallies,
                                          const ObservedRates& analytic,
                                          const ProtocolParams& prot);

}  // namespace snsqkd
