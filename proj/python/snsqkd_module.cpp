#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snsqkd/attack.hpp"
#include "snsqkd/channel.hpp"
#include "snsqkd/core.hpp"
#include "snsqkd/decoy.hpp"
#include "snsqkd/keyrate.hpp"
#include "snsqkd/report_io.hpp"
#include "snsqkd/simulator.hpp"

namespace py = pybind11;
using namespace snsqkd;

PYBIND11_MODULE(_core, m) {
    m.doc() = "sending-or-not-sending twin-field QKD model, simulator and bounds";

    m.def("binary_entropy", &binary_entropy, py::arg("x"));
    m.def(
        "photon_number_probs",
        [](double mu, int k_max) {
            const PhotonNumberDistribution d = photon_number_probs(Intensity(mu), k_max);
            return py::make_tuple(d.prob, d.truncation_tail);
        },
        py::arg("mu"), py::arg("k_max") = 40,
        "Two-pulse Poisson photon-number probabilities and truncation tail");
    m.def(
        "phase_slice_accept",
        [](double delta_a, double delta_b, double lambda) {
            return phase_slice_accept(PhasePair{delta_a, delta_b}, lambda);
        },
        py::arg("delta_a"), py::arg("delta_b"), py::arg("lambda"));
    m.def("phase_acceptance_fraction", &phase_acceptance_fraction, py::arg("lambda"));

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<>())
        .def_readwrite("distance_km", &ChannelParams::distance_km)
        .def_readwrite("attenuation_db_per_km", &ChannelParams::attenuation_db_per_km)
        .def_readwrite("detector_efficiency", &ChannelParams::detector_efficiency)
        .def_readwrite("dark_count_prob", &ChannelParams::dark_count_prob)
        .def_readwrite("misalignment", &ChannelParams::misalignment)
        .def("validate", &ChannelParams::validate);

    py::class_<ProtocolParams>(m, "ProtocolParams")
        .def(py::init<>())
        .def_readwrite("epsilon", &ProtocolParams::epsilon)
        .def_readwrite("mu_signal", &ProtocolParams::mu_signal)
        .def_readwrite("decoy_intensities", &ProtocolParams::decoy_intensities)
        .def_readwrite("lambda_", &ProtocolParams::lambda)
        .def_readwrite("q_signal", &ProtocolParams::q_signal)
        .def_readwrite("f_error_correction", &ProtocolParams::f_error_correction)
        .def("validate", &ProtocolParams::validate);

    py::class_<ObservedRates>(m, "ObservedRates")
        .def(py::init<>())
        .def_readwrite("intensities", &ObservedRates::intensities)
        .def_readwrite("s0", &ObservedRates::s0)
        .def_readwrite("s_mu", &ObservedRates::s_mu)
        .def_readwrite("e_mu_x", &ObservedRates::e_mu_x)
        .def_readwrite("s_z", &ObservedRates::s_z)
        .def_readwrite("e_z", &ObservedRates::e_z)
        .def_readwrite("n_t_per_window", &ObservedRates::n_t_per_window)
        .def_readwrite("s1_true", &ObservedRates::s1_true)
        .def_readwrite("e1x_true", &ObservedRates::e1x_true);

    m.def("arm_transmittance", &arm_transmittance, py::arg("channel"));
    m.def("analytic_rates", &analytic_rates, py::arg("protocol"), py::arg("channel"));

    py::class_<IntensityTally>(m, "IntensityTally")
        .def_readonly("windows", &IntensityTally::windows)
        .def_readonly("accepted", &IntensityTally::accepted)
        .def_readonly("effective", &IntensityTally::effective)
        .def_readonly("errors", &IntensityTally::errors)
        .def_readonly("n_plus_left", &IntensityTally::n_plus_left)
        .def_readonly("n_minus_left", &IntensityTally::n_minus_left)
        .def_readonly("n_plus_right", &IntensityTally::n_plus_right)
        .def_readonly("n_minus_right", &IntensityTally::n_minus_right);

    py::class_<TallySet>(m, "TallySet")
        .def_readonly("n_windows", &TallySet::n_windows)
        .def_readonly("z_windows", &TallySet::z_windows)
        .def_readonly("z_effective", &TallySet::z_effective)
        .def_readonly("z_errors", &TallySet::z_errors)
        .def_readonly("z1_windows", &TallySet::z1_windows)
        .def_readonly("z1_effective", &TallySet::z1_effective)
        .def_readonly("mismatched_windows", &TallySet::mismatched_windows)
        .def_readonly("x", &TallySet::x)
        .def_readonly("x1_accepted_windows", &TallySet::x1_accepted_windows)
        .def_readonly("x1_effective", &TallySet::x1_effective)
        .def_readonly("x1_errors", &TallySet::x1_errors)
        .def("merge", &TallySet::merge);

    m.def("run_protocol", &run_protocol, py::arg("protocol"), py::arg("channel"),
          py::arg("n_windows"), py::arg("seed"), py::arg("first_window") = 0);
    m.def("rates_from_tallies", &rates_from_tallies, py::arg("tallies"),
          py::arg("protocol"));

    py::enum_<DecoyMode>(m, "DecoyMode")
        .value("three_intensity", DecoyMode::three_intensity)
        .value("infinite", DecoyMode::infinite);

    py::class_<DecoyEstimate>(m, "DecoyEstimate")
        .def_readonly("mode", &DecoyEstimate::mode)
        .def_readonly("s1_lower", &DecoyEstimate::s1_lower)
        .def_readonly("s1_exact", &DecoyEstimate::s1_exact)
        .def_readonly("e1ph_upper", &DecoyEstimate::e1ph_upper)
        .def_readonly("n1", &DecoyEstimate::n1)
        .def_readonly("s1_clamped", &DecoyEstimate::s1_clamped)
        .def_readonly("e1ph_clamped", &DecoyEstimate::e1ph_clamped);

    m.def(
        "s1_lower_bound",
        [](const ObservedRates& rates, double mu1, double mu2) {
            return s1_lower_bound(rates, Intensity(mu1), Intensity(mu2));
        },
        py::arg("rates"), py::arg("mu1"), py::arg("mu2"));
    m.def(
        "e1ph_upper_bound",
        [](const ObservedRates& rates, double mu, double s1) {
            return e1ph_upper_bound(rates, Intensity(mu), s1);
        },
        py::arg("rates"), py::arg("mu"), py::arg("s1"));
    m.def("estimate_single_photon", &estimate_single_photon, py::arg("rates"),
          py::arg("protocol"), py::arg("mode"));
    m.def("n1_estimate", &n1_estimate, py::arg("protocol"), py::arg("s1"),
          py::arg("n_z_windows"));

    py::class_<KeyRateFlags>(m, "KeyRateFlags")
        .def_readonly("rate_clamped", &KeyRateFlags::rate_clamped)
        .def_readonly("s1_clamped", &KeyRateFlags::s1_clamped)
        .def_readonly("e1ph_clamped", &KeyRateFlags::e1ph_clamped)
        .def_readonly("all_zero_landscape", &KeyRateFlags::all_zero_landscape);

    py::class_<KeyRateReport>(m, "KeyRateReport")
        .def_readonly("rate_per_window", &KeyRateReport::rate_per_window)
        .def_readonly("rate_raw", &KeyRateReport::rate_raw)
        .def_readonly("optimized_epsilon", &KeyRateReport::optimized_epsilon)
        .def_readonly("optimized_mu_signal", &KeyRateReport::optimized_mu_signal)
        .def_readonly("estimate", &KeyRateReport::estimate)
        .def_readonly("rates", &KeyRateReport::rates)
        .def_readonly("protocol", &KeyRateReport::protocol)
        .def_readonly("channel", &KeyRateReport::channel)
        .def_readonly("flags", &KeyRateReport::flags)
        .def_readonly("n_windows", &KeyRateReport::n_windows)
        .def_readonly("n_z_windows", &KeyRateReport::n_z_windows)
        .def_readonly("n_t", &KeyRateReport::n_t)
        .def_readonly("final_key_length", &KeyRateReport::final_key_length)
        .def("to_json", [](const KeyRateReport& r) {
            const nlohmann::json j = r;
            return j.dump(2);
        });

    m.def("rate_per_window",
          [](const ProtocolParams& prot, const ObservedRates& rates,
             const DecoyEstimate& est) { return rate_per_window(prot, rates, est); },
          py::arg("protocol"), py::arg("rates"), py::arg("estimate"));
    m.def("final_key_length", &final_key_length, py::arg("n1"), py::arg("e1ph"),
          py::arg("n_t"), py::arg("e_z"), py::arg("f"));
    m.def("evaluate", &evaluate, py::arg("protocol"), py::arg("channel"),
          py::arg("mode"), py::arg("n_windows") = 0.0);
    m.def("optimize", &optimize, py::arg("channel"), py::arg("protocol_template"),
          py::arg("mode"), py::arg("n_windows") = 0.0, py::arg("fix_epsilon") = false,
          py::arg("fix_mu_signal") = false);
    m.def("secure_distance_km", &secure_distance_km, py::arg("channel_template"),
          py::arg("protocol_template"), py::arg("mode"), py::arg("d_lo") = 0.0,
          py::arg("d_hi") = 1000.0);

    py::class_<attack::AttackSummary>(m, "AttackSummary")
        .def_readonly("mu", &attack::AttackSummary::mu)
        .def_readonly("rho", &attack::AttackSummary::rho)
        .def_readonly("trials", &attack::AttackSummary::trials)
        .def_readonly("accepted_trials", &attack::AttackSummary::accepted_trials)
        .def_readonly("heralding_analytic", &attack::AttackSummary::heralding_analytic)
        .def_readonly("heralding_empirical", &attack::AttackSummary::heralding_empirical)
        .def_readonly("discrimination_accuracy",
                      &attack::AttackSummary::discrimination_accuracy)
        .def_readonly("psi5_inner_product", &attack::AttackSummary::psi5_inner_product)
        .def_readonly("single_photon_fraction",
                      &attack::AttackSummary::single_photon_fraction)
        .def_readonly("naive_key_fraction", &attack::AttackSummary::naive_key_fraction)
        .def_readonly("eve_information_bits",
                      &attack::AttackSummary::eve_information_bits);

    m.def(
        "run_attack",
        [](double mu, double rho, std::uint64_t trials, std::uint64_t seed, int k_max) {
            return attack::run_attack(Intensity(mu), rho, trials, seed, k_max);
        },
        py::arg("mu"), py::arg("rho") = 0.0, py::arg("trials") = 10000,
        py::arg("seed") = 1, py::arg("k_max") = 30);

#ifdef SNSQKD_VERSION_INFO
    m.attr("__version__") = SNSQKD_VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
