#include "snsqkd/report_io.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace snsqkd {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string decoy_mode_name(DecoyMode mode) {
    return mode == DecoyMode::infinite ? "infinite" : "three_intensity";
}

DecoyMode decoy_mode_from_name(const std::string& name) {
    if (name == "infinite") return DecoyMode::infinite;
    if (name == "three_intensity" || name == "three") return DecoyMode::three_intensity;
    throw std::domain_error("unknown decoy mode: " + name);
}

void to_json(nlohmann::json& j, const ChannelParams& v) {
    j = nlohmann::json{{"distance_km", v.distance_km},
                       {"attenuation_db_per_km", v.attenuation_db_per_km},
                       {"detector_efficiency", v.detector_efficiency},
                       {"dark_count_prob", v.dark_count_prob},
                       {"misalignment", v.misalignment}};
}

void from_json(const nlohmann::json& j, ChannelParams& v) {
    j.at("distance_km").get_to(v.distance_km);
    j.at("attenuation_db_per_km").get_to(v.attenuation_db_per_km);
    j.at("detector_efficiency").get_to(v.detector_efficiency);
    j.at("dark_count_prob").get_to(v.dark_count_prob);
    j.at("misalignment").get_to(v.misalignment);
}

void to_json(nlohmann::json& j, const ProtocolParams& v) {
    j = nlohmann::json{{"epsilon", v.epsilon},
                       {"mu_signal", v.mu_signal},
                       {"decoy_intensities", v.decoy_intensities},
                       {"lambda", v.lambda},
                       {"q_signal", v.q_signal},
                       {"f_error_correction", v.f_error_correction}};
}

void from_json(const nlohmann::json& j, ProtocolParams& v) {
    j.at("epsilon").get_to(v.epsilon);
    j.at("mu_signal").get_to(v.mu_signal);
    j.at("decoy_intensities").get_to(v.decoy_intensities);
    j.at("lambda").get_to(v.lambda);
    j.at("q_signal").get_to(v.q_signal);
    j.at("f_error_correction").get_to(v.f_error_correction);
}

void to_json(nlohmann::json& j, const ObservedRates& v) {
    j = nlohmann::json{{"intensities", v.intensities},
                       {"s0", v.s0},
                       {"s_mu", v.s_mu},
                       {"e_mu_x", v.e_mu_x},
                       {"s_z", v.s_z},
                       {"e_z", v.e_z},
                       {"n_t_per_window", v.n_t_per_window},
                       {"s1_true", v.s1_true},
                       {"e1x_true", v.e1x_true}};
}

void from_json(const nlohmann::json& j, ObservedRates& v) {
    j.at("intensities").get_to(v.intensities);
    j.at("s0").get_to(v.s0);
    j.at("s_mu").get_to(v.s_mu);
    j.at("e_mu_x").get_to(v.e_mu_x);
    j.at("s_z").get_to(v.s_z);
    j.at("e_z").get_to(v.e_z);
    j.at("n_t_per_window").get_to(v.n_t_per_window);
    j.at("s1_true").get_to(v.s1_true);
    j.at("e1x_true").get_to(v.e1x_true);
}

void to_json(nlohmann::json& j, const IntensityTally& v) {
    j = nlohmann::json{{"windows", v.windows},
                       {"accepted", v.accepted},
                       {"effective", v.effective},
                       {"errors", v.errors},
                       {"n_plus_left", v.n_plus_left},
                       {"n_minus_left", v.n_minus_left},
                       {"n_plus_right", v.n_plus_right},
                       {"n_minus_right", v.n_minus_right}};
}

void from_json(const nlohmann::json& j, IntensityTally& v) {
    j.at("windows").get_to(v.windows);
    j.at("accepted").get_to(v.accepted);
    j.at("effective").get_to(v.effective);
    j.at("errors").get_to(v.errors);
    j.at("n_plus_left").get_to(v.n_plus_left);
    j.at("n_minus_left").get_to(v.n_minus_left);
    j.at("n_plus_right").get_to(v.n_plus_right);
    j.at("n_minus_right").get_to(v.n_minus_right);
}

void to_json(nlohmann::json& j, const TallySet& v) {
    j = nlohmann::json{{"n_windows", v.n_windows},
                       {"z_windows", v.z_windows},
                       {"z_effective", v.z_effective},
                       {"z_errors", v.z_errors},
                       {"z1_windows", v.z1_windows},
                       {"z1_effective", v.z1_effective},
                       {"mismatched_windows", v.mismatched_windows},
                       {"x", v.x},
                       {"x1_accepted_windows", v.x1_accepted_windows},
                       {"x1_effective", v.x1_effective},
                       {"x1_errors", v.x1_errors}};
}

void from_json(const nlohmann::json& j, TallySet& v) {
    j.at("n_windows").get_to(v.n_windows);
    j.at("z_windows").get_to(v.z_windows);
    j.at("z_effective").get_to(v.z_effective);
    j.at("z_errors").get_to(v.z_errors);
    j.at("z1_windows").get_to(v.z1_windows);
    j.at("z1_effective").get_to(v.z1_effective);
    j.at("mismatched_windows").get_to(v.mismatched_windows);
    j.at("x").get_to(v.x);
    j.at("x1_accepted_windows").get_to(v.x1_accepted_windows);
    j.at("x1_effective").get_to(v.x1_effective);
    j.at("x1_errors").get_to(v.x1_errors);
}

void to_json(nlohmann::json& j, const DecoyEstimate& v) {
    j = nlohmann::json{{"mode", decoy_mode_name(v.mode)},
                       {"s1_lower", v.s1_lower},
                       {"s1_exact", v.s1_exact},
                       {"e1ph_upper", v.e1ph_upper},
                       {"n1", v.n1},
                       {"s1_clamped", v.s1_clamped},
                       {"e1ph_clamped", v.e1ph_clamped}};
}

void from_json(const nlohmann::json& j, DecoyEstimate& v) {
    v.mode = decoy_mode_from_name(j.at("mode").get<std::string>());
    j.at("s1_lower").get_to(v.s1_lower);
    j.at("s1_exact").get_to(v.s1_exact);
    j.at("e1ph_upper").get_to(v.e1ph_upper);
    j.at("n1").get_to(v.n1);
    j.at("s1_clamped").get_to(v.s1_clamped);
    j.at("e1ph_clamped").get_to(v.e1ph_clamped);
}

void to_json(nlohmann::json& j, const KeyRateFlags& v) {
    j = nlohmann::json{{"rate_clamped", v.rate_clamped},
                       {"s1_clamped", v.s1_clamped},
                       {"e1ph_clamped", v.e1ph_clamped},
                       {"all_zero_landscape", v.all_zero_landscape}};
}

void from_json(const nlohmann::json& j, KeyRateFlags& v) {
    j.at("rate_clamped").get_to(v.rate_clamped);
    j.at("s1_clamped").get_to(v.s1_clamped);
    j.at("e1ph_clamped").get_to(v.e1ph_clamped);
    j.at("all_zero_landscape").get_to(v.all_zero_landscape);
}

void to_json(nlohmann::json& j, const KeyRateReport& v) {
    j = nlohmann::json{{"rate_per_window", v.rate_per_window},
                       {"rate_raw", v.rate_raw},
                       {"optimized_epsilon", v.optimized_epsilon},
                       {"optimized_mu_signal", v.optimized_mu_signal},
                       {"estimate", v.estimate},
                       {"rates", v.rates},
                       {"protocol", v.protocol},
                       {"channel", v.channel},
                       {"flags", v.flags}};
    if (v.n_windows > 0.0) {
        j["final_key"] = nlohmann::json{{"n_windows", v.n_windows},
                                        {"n_z_windows", v.n_z_windows},
                                        {"n_t", v.n_t},
                                        {"final_key_length", v.final_key_length}};
    }
}

void from_json(const nlohmann::json& j, KeyRateReport& v) {
    j.at("rate_per_window").get_to(v.rate_per_window);
    j.at("rate_raw").get_to(v.rate_raw);
    j.at("optimized_epsilon").get_to(v.optimized_epsilon);
    j.at("optimized_mu_signal").get_to(v.optimized_mu_signal);
    j.at("estimate").get_to(v.estimate);
    j.at("rates").get_to(v.rates);
    j.at("protocol").get_to(v.protocol);
    j.at("channel").get_to(v.channel);
    j.at("flags").get_to(v.flags);
    if (j.contains("final_key")) {
        const nlohmann::json& f = j.at("final_key");
        f.at("n_windows").get_to(v.n_windows);
        f.at("n_z_windows").get_to(v.n_z_windows);
        f.at("n_t").get_to(v.n_t);
        f.at("final_key_length").get_to(v.final_key_length);
    }
}

void to_json(nlohmann::json& j, const RateComparison& v) {
    j = nlohmann::json{{"name", v.name},
                       {"analytic", v.analytic},
                       {"empirical", v.empirical},
                       {"denominator", v.denominator},
                       {"standard_error", v.standard_error},
                       {"z_score", v.z_score},
                       {"comparable", v.comparable}};
}

std::string flags_token(const KeyRateFlags& flags) {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(flags.rate_clamped, "rate_clamped");
    add(flags.s1_clamped, "s1_clamped");
    add(flags.e1ph_clamped, "e1ph_clamped");
    add(flags.all_zero_landscape, "all_zero_landscape");
    return out.empty() ? "-" : out;
}

std::string scan_csv(const std::vector<ScanPoint>& points) {
    std::string out =
        "axis_value,rate,optimized_epsilon,optimized_mu_signal,e1ph_upper,e_z,s_z,flags\n";
    for (const ScanPoint& p : points) {
        out += format_double(p.axis_value);
        out += ',';
        out += format_double(p.report.rate_per_window);
        out += ',';
        out += format_double(p.report.optimized_epsilon);
        out += ',';
        out += format_double(p.report.optimized_mu_signal);
        out += ',';
        out += format_double(p.report.estimate.e1ph_upper);
        out += ',';
        out += format_double(p.report.rates.e_z);
        out += ',';
        out += format_double(p.report.rates.s_z);
        out += ',';
        out += flags_token(p.report.flags);
        out += '\n';
    }
    return out;
}

std::vector<ScanCsvRow> parse_scan_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<ScanCsvRow> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;  // header
            continue;
        }
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() != 8)
            throw std::runtime_error("malformed scan CSV row: " + line);
        auto num = [&](int i) { return std::strtod(fields[static_cast<std::size_t>(i)].c_str(), nullptr); };
        ScanCsvRow r;
        r.axis_value = num(0);
        r.rate = num(1);
        r.optimized_epsilon = num(2);
        r.optimized_mu_signal = num(3);
        r.e1ph_upper = num(4);
        r.e_z = num(5);
        r.s_z = num(6);
        r.flags = fields[7];
        rows.push_back(std::move(r));
    }
    return rows;
}

nlohmann::json scan_json(const std::vector<ScanPoint>& points) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ScanPoint& p : points) {
        nlohmann::json entry{{"axis_value", p.axis_value}, {"report", p.report}};
        arr.push_back(std::move(entry));
    }
    return arr;
}

namespace {

std::string trim(const std::string& s) {
    const std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     " has no '=': " + stripped);
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     " has an empty key");
        kv[key] = value;
    }
    return kv;
}

}  // namespace snsqkd

namespace snsqkd::attack {

void to_json(nlohmann::json& j, const AttackSummary& v) {
    j = nlohmann::json{{"mu", v.mu},
                       {"rho", v.rho},
                       {"trials", v.trials},
                       {"trials_bit0", v.trials_bit0},
                       {"trials_bit1", v.trials_bit1},
                       {"accepted_trials", v.accepted_trials},
                       {"accepted_bit0", v.accepted_bit0},
                       {"accepted_bit1", v.accepted_bit1},
                       {"heralding_analytic", v.heralding_analytic},
                       {"heralding_analytic_bit0", v.heralding_analytic_bit0},
                       {"heralding_analytic_bit1", v.heralding_analytic_bit1},
                       {"heralding_empirical", v.heralding_empirical},
                       {"heralding_empirical_bit0", v.heralding_empirical_bit0},
                       {"heralding_empirical_bit1", v.heralding_empirical_bit1},
                       {"discrimination_accuracy", v.discrimination_accuracy},
                       {"psi5_inner_product", v.psi5_inner_product},
                       {"single_photon_fraction", v.single_photon_fraction},
                       {"naive_key_fraction", v.naive_key_fraction},
                       {"eve_information_bits", v.eve_information_bits}};
}

void from_json(const nlohmann::json& j, AttackSummary& v) {
    j.at("mu").get_to(v.mu);
    j.at("rho").get_to(v.rho);
    j.at("trials").get_to(v.trials);
    j.at("trials_bit0").get_to(v.trials_bit0);
    j.at("trials_bit1").get_to(v.trials_bit1);
    j.at("accepted_trials").get_to(v.accepted_trials);
    j.at("accepted_bit0").get_to(v.accepted_bit0);
    j.at("accepted_bit1").get_to(v.accepted_bit1);
    j.at("heralding_analytic").get_to(v.heralding_analytic);
    j.at("heralding_analytic_bit0").get_to(v.heralding_analytic_bit0);
    j.at("heralding_analytic_bit1").get_to(v.heralding_analytic_bit1);
    j.at("heralding_empirical").get_to(v.heralding_empirical);
    j.at("heralding_empirical_bit0").get_to(v.heralding_empirical_bit0);
    j.at("heralding_empirical_bit1").get_to(v.heralding_empirical_bit1);
    j.at("discrimination_accuracy").get_to(v.discrimination_accuracy);
    j.at("psi5_inner_product").get_to(v.psi5_inner_product);
    j.at("single_photon_fraction").get_to(v.single_photon_fraction);
    j.at("naive_key_fraction").get_to(v.naive_key_fraction);
    j.at("eve_information_bits").get_to(v.eve_information_bits);
}

}  // namespace snsqkd::attack
