#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "snsqkd/attack.hpp"
#include "snsqkd/channel.hpp"
#include "snsqkd/decoy.hpp"
#include "snsqkd/keyrate.hpp"
#include "snsqkd/report_io.hpp"
#include "snsqkd/simulator.hpp"

namespace {

using snsqkd::ChannelParams;
using snsqkd::DecoyMode;
using snsqkd::ProtocolParams;

// One subcommand's option set: CLI flags plus the matching config-file keys
// (flag name without the leading dashes). Flags given on the command line win
// over the file; the file wins over defaults.
struct OptionBinding {
    std::string key;
    std::function<void(const std::string&)> apply;
};

class ConfigLayer {
  public:
    explicit ConfigLayer(CLI::App* cmd) {
        cmd->add_option("--config", config_path_, "flat key=value parameter file");
    }

    void bind_double(CLI::App* cmd, const std::string& flag, double& target,
                     const std::string& help) {
        cmd->add_option(flag, target, help);
        bindings_.push_back({flag.substr(2), [&target](const std::string& v) {
                                 target = parse_double(v);
                             }});
    }

    void bind_u64(CLI::App* cmd, const std::string& flag, std::uint64_t& target,
                  const std::string& help) {
        cmd->add_option(flag, target, help);
        bindings_.push_back({flag.substr(2), [&target](const std::string& v) {
                                 target = parse_u64(v);
                             }});
    }

    void bind_string(CLI::App* cmd, const std::string& flag, std::string& target,
                     const std::string& help) {
        cmd->add_option(flag, target, help);
        bindings_.push_back(
            {flag.substr(2), [&target](const std::string& v) { target = v; }});
    }

    void bind_intensities(CLI::App* cmd, std::vector<double>& target) {
        cmd->add_option("--decoy-intensities", target,
                        "decoy intensity list, ascending, starting at 0")
            ->delimiter(',');
        bindings_.push_back({"decoy-intensities", [&target](const std::string& v) {
                                 target = parse_double_list(v);
                             }});
    }

    // Call after CLI11 parsing: folds the config file (if any) into the bound
    // targets, skipping keys whose flags were given explicitly.
    void apply_file(const CLI::App& cmd) {
        if (config_path_.empty()) return;
        std::ifstream in(config_path_);
        if (!in) throw std::domain_error("cannot open config file: " + config_path_);
        std::stringstream buf;
        buf << in.rdbuf();
        std::map<std::string, std::string> kv;
        try {
            kv = snsqkd::parse_config_text(buf.str());
        } catch (const std::runtime_error& e) {
            throw std::domain_error(e.what());
        }
        for (const auto& [key, value] : kv) {
            const OptionBinding* binding = nullptr;
            for (const OptionBinding& b : bindings_)
                if (b.key == key) binding = &b;
            if (!binding)
                throw std::domain_error("unknown config key: " + key);
            if (cmd.count("--" + key) > 0) continue;  // explicit flag wins
            try {
                binding->apply(value);
            } catch (const std::exception& e) {
                throw std::domain_error("config key '" + key + "': " + e.what());
            }
            file_keys_.insert(key);
        }
    }

    // True when the value arrived explicitly (flag or config file).
    bool given(const CLI::App& cmd, const std::string& key) const {
        return cmd.count("--" + key) > 0 || file_keys_.count(key) > 0;
    }

  private:
    static double parse_double(const std::string& v) {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::domain_error("not a number: " + v);
        return x;
    }

    static std::uint64_t parse_u64(const std::string& v) {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::domain_error("not a count: " + v);
        return x;
    }

    static std::vector<double> parse_double_list(const std::string& v) {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
        return out;
    }

    std::string config_path_;
    std::vector<OptionBinding> bindings_;
    std::set<std::string> file_keys_;
};

struct CommonParams {
    ChannelParams chan;
    ProtocolParams prot;
    std::string decoy_mode = "infinite";

    DecoyMode mode() const { return snsqkd::decoy_mode_from_name(decoy_mode); }
};

void bind_common(CLI::App* cmd, ConfigLayer& cfg, CommonParams& p) {
    cfg.bind_double(cmd, "--distance-km", p.chan.distance_km, "total separation");
    cfg.bind_double(cmd, "--attenuation-db-per-km", p.chan.attenuation_db_per_km,
                    "fiber loss coefficient");
    cfg.bind_double(cmd, "--detector-efficiency", p.chan.detector_efficiency,
                    "detector efficiency");
    cfg.bind_double(cmd, "--dark-count-prob", p.chan.dark_count_prob,
                    "dark count probability per detector per window");
    cfg.bind_double(cmd, "--misalignment", p.chan.misalignment,
                    "single-photon wrong-port probability");
    cfg.bind_double(cmd, "--epsilon", p.prot.epsilon, "send probability in Z windows");
    cfg.bind_double(cmd, "--mu-signal", p.prot.mu_signal, "signal intensity");
    cfg.bind_double(cmd, "--lambda", p.prot.lambda, "phase-slice width parameter");
    cfg.bind_double(cmd, "--q-signal", p.prot.q_signal,
                    "per-party signal-window probability");
    cfg.bind_double(cmd, "--f-error-correction", p.prot.f_error_correction,
                    "error-correction efficiency factor");
    cfg.bind_intensities(cmd, p.prot.decoy_intensities);
    cfg.bind_string(cmd, "--decoy-mode", p.decoy_mode,
                    "single-photon estimation mode: three|infinite");
}

void write_or_print(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload;
        if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + out_path);
    out << payload;
}

void print_keyrate_summary(const snsqkd::KeyRateReport& rep) {
    std::printf("distance_km           %s\n",
                snsqkd::format_double(rep.channel.distance_km).c_str());
    std::printf("misalignment          %s\n",
                snsqkd::format_double(rep.channel.misalignment).c_str());
    std::printf("decoy_mode            %s\n",
                snsqkd::decoy_mode_name(rep.estimate.mode).c_str());
    std::printf("optimized_epsilon     %s\n",
                snsqkd::format_double(rep.optimized_epsilon).c_str());
    std::printf("optimized_mu_signal   %s\n",
                snsqkd::format_double(rep.optimized_mu_signal).c_str());
    std::printf("rate_per_window       %s\n",
                snsqkd::format_double(rep.rate_per_window).c_str());
    std::printf("s1                    %s\n",
                snsqkd::format_double(rep.estimate.s1()).c_str());
    std::printf("e1ph_upper            %s\n",
                snsqkd::format_double(rep.estimate.e1ph_upper).c_str());
    std::printf("s_z                   %s\n", snsqkd::format_double(rep.rates.s_z).c_str());
    std::printf("e_z                   %s\n", snsqkd::format_double(rep.rates.e_z).c_str());
    std::printf("flags                 %s\n", snsqkd::flags_token(rep.flags).c_str());
    if (rep.n_windows > 0.0) {
        std::printf("n_windows             %s\n",
                    snsqkd::format_double(rep.n_windows).c_str());
        std::printf("n1                    %s\n",
                    snsqkd::format_double(rep.estimate.n1).c_str());
        std::printf("n_t                   %s\n", snsqkd::format_double(rep.n_t).c_str());
        std::printf("final_key_length      %s\n",
                    snsqkd::format_double(rep.final_key_length).c_str());
    }
}

int cmd_keyrate(CLI::App& cmd, ConfigLayer& cfg, CommonParams& p, double n_windows,
                const std::string& out_path) {
    cfg.apply_file(cmd);
    p.prot.validate();
    p.chan.validate();
    const bool fix_eps = cfg.given(cmd, "epsilon");
    const bool fix_mu = cfg.given(cmd, "mu-signal");
    const snsqkd::KeyRateReport rep =
        snsqkd::optimize(p.chan, p.prot, p.mode(), n_windows, fix_eps, fix_mu);
    print_keyrate_summary(rep);
    const nlohmann::json j = rep;
    write_or_print(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_scan(CLI::App& cmd, ConfigLayer& cfg, CommonParams& p, const std::string& axis,
             const std::string& grid, const std::string& format,
             const std::string& out_path) {
    cfg.apply_file(cmd);
    p.prot.validate();
    p.chan.validate();
    double start = 0.0, stop = 0.0, step = 0.0;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3)
        throw std::domain_error("grid must be start:stop:step, got: " + grid);
    snsqkd::ScanAxis ax;
    if (axis == "distance")
        ax = snsqkd::ScanAxis::distance;
    else if (axis == "misalignment")
        ax = snsqkd::ScanAxis::misalignment;
    else
        throw std::domain_error("scan-axis must be distance or misalignment");
    const std::vector<snsqkd::ScanPoint> points =
        snsqkd::scan(ax, start, stop, step, p.chan, p.prot, p.mode());
    std::string payload;
    if (format == "csv")
        payload = snsqkd::scan_csv(points);
    else if (format == "json")
        payload = snsqkd::scan_json(points).dump(2) + "\n";
    else
        throw std::domain_error("format must be json or csv");
    write_or_print(out_path, payload);
    if (!out_path.empty())
        std::printf("wrote %zu scan points to %s\n", points.size(), out_path.c_str());
    return 0;
}

int cmd_montecarlo(CLI::App& cmd, ConfigLayer& cfg, CommonParams& p,
                   std::uint64_t n_windows, std::uint64_t seed,
                   const std::string& out_path) {
    cfg.apply_file(cmd);
    p.prot.validate();
    p.chan.validate();
    if (n_windows < 1) throw std::domain_error("n-windows must be >= 1");
    const snsqkd::TallySet tallies =
        snsqkd::run_protocol(p.prot, p.chan, n_windows, seed);
    const snsqkd::ObservedRates analytic = snsqkd::analytic_rates(p.prot, p.chan);
    const std::vector<snsqkd::RateComparison> rows =
        snsqkd::compare_rates(tallies, analytic, p.prot);

    std::printf("%-28s %14s %14s %10s\n", "quantity", "analytic", "empirical", "z");
    double max_abs_z = 0.0;
    for (const snsqkd::RateComparison& r : rows) {
        if (r.comparable) {
            std::printf("%-28s %14.6g %14.6g %10.2f\n", r.name.c_str(), r.analytic,
                        r.empirical, r.z_score);
            max_abs_z = std::max(max_abs_z, std::abs(r.z_score));
        } else {
            std::printf("%-28s %14.6g %14.6g %10s\n", r.name.c_str(), r.analytic,
                        r.empirical, "n/a");
        }
    }
    std::printf("max |z| over comparable quantities: %.2f\n", max_abs_z);

    nlohmann::json j{{"channel", p.chan},
                     {"protocol", p.prot},
                     {"n_windows", n_windows},
                     {"seed", seed},
                     {"tallies", tallies},
                     {"rates_empirical", snsqkd::rates_from_tallies(tallies, p.prot)},
                     {"rates_analytic", analytic},
                     {"comparison", rows}};
    write_or_print(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_attack(CLI::App& cmd, ConfigLayer& cfg, double mu, double rho,
               std::uint64_t trials, std::uint64_t seed, const std::string& out_path) {
    cfg.apply_file(cmd);
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("attack needs mu in (0, 1)");
    if (trials < 1) throw std::domain_error("trials must be >= 1");
    const snsqkd::attack::AttackSummary s =
        snsqkd::attack::run_attack(snsqkd::Intensity(mu), rho, trials, seed);
    std::printf("heralded %llu of %llu trials (analytic heralding %s); "
                "discrimination accuracy %s; single-photon fraction %s\n",
                static_cast<unsigned long long>(s.accepted_trials),
                static_cast<unsigned long long>(s.trials),
                snsqkd::format_double(s.heralding_analytic).c_str(),
                snsqkd::format_double(s.discrimination_accuracy).c_str(),
                snsqkd::format_double(s.single_photon_fraction).c_str());
    std::printf("tagged-bit accounting would keep a fraction %s of heralded bits as "
                "key while the eavesdropper holds %s bits each\n",
                snsqkd::format_double(s.naive_key_fraction).c_str(),
                snsqkd::format_double(s.eve_information_bits).c_str());
    const nlohmann::json j = s;
    write_or_print(out_path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sending-or-not-sending twin-field QKD toolkit"};
    app.require_subcommand(1);

    // keyrate
    CLI::App* keyrate = app.add_subcommand(
        "keyrate", "optimized key rate for one channel configuration");
    ConfigLayer keyrate_cfg(keyrate);
    CommonParams keyrate_p;
    double keyrate_windows = 0.0;
    std::string keyrate_out;
    bind_common(keyrate, keyrate_cfg, keyrate_p);
    keyrate_cfg.bind_double(keyrate, "--n-windows", keyrate_windows,
                            "session window count for final-key accounting");
    keyrate->add_option("--out", keyrate_out, "report JSON path (default: stdout)");

    // scan
    CLI::App* scan = app.add_subcommand("scan", "optimized rate over a parameter grid");
    ConfigLayer scan_cfg(scan);
    CommonParams scan_p;
    std::string scan_axis = "distance", scan_grid, scan_format = "csv", scan_out;
    bind_common(scan, scan_cfg, scan_p);
    scan_cfg.bind_string(scan, "--scan-axis", scan_axis, "distance|misalignment");
    scan_cfg.bind_string(scan, "--grid", scan_grid, "start:stop:step");
    scan_cfg.bind_string(scan, "--format", scan_format, "csv|json");
    scan->add_option("--out", scan_out, "output path (default: stdout)");

    // montecarlo
    CLI::App* mc = app.add_subcommand(
        "montecarlo", "event-level simulation with analytic comparison");
    ConfigLayer mc_cfg(mc);
    CommonParams mc_p;
    std::uint64_t mc_windows = 1000000, mc_seed = 1;
    std::string mc_out;
    bind_common(mc, mc_cfg, mc_p);
    mc_cfg.bind_u64(mc, "--n-windows", mc_windows, "number of time windows");
    mc_cfg.bind_u64(mc, "--seed", mc_seed, "master seed");
    mc->add_option("--out", mc_out, "tally JSON path (default: stdout)");

    // attack
    CLI::App* attack = app.add_subcommand(
        "attack", "detection-filter eavesdropping demonstration");
    ConfigLayer attack_cfg(attack);
    double attack_mu = 0.1, attack_rho = 0.0;
    std::uint64_t attack_trials = 10000, attack_seed = 1;
    std::string attack_out;
    attack_cfg.bind_double(attack, "--mu", attack_mu, "pulse intensity, in (0, 1)");
    attack_cfg.bind_double(attack, "--rho", attack_rho, "encoding phase");
    attack_cfg.bind_u64(attack, "--trials", attack_trials, "number of pulses");
    attack_cfg.bind_u64(attack, "--seed", attack_seed, "master seed");
    attack->add_option("--out", attack_out, "summary JSON path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (keyrate->parsed())
            return cmd_keyrate(*keyrate, keyrate_cfg, keyrate_p, keyrate_windows,
                               keyrate_out);
        if (scan->parsed())
            return cmd_scan(*scan, scan_cfg, scan_p, scan_axis, scan_grid, scan_format,
                            scan_out);
        if (mc->parsed())
            return cmd_montecarlo(*mc, mc_cfg, mc_p, mc_windows, mc_seed, mc_out);
        if (attack->parsed())
            return cmd_attack(*attack, attack_cfg, attack_mu, attack_rho, attack_trials,
                              attack_seed, attack_out);
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 1;
}
