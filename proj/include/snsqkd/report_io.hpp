#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "snsqkd/attack.hpp"
#include "snsqkd/channel.hpp"
#include "snsqkd/decoy.hpp"
#include "snsqkd/keyrate.hpp"
#include "snsqkd/simulator.hpp"

namespace snsqkd {

// Shortest decimal representation that parses back to exactly the same
// double; used everywhere a number leaves the process.
std::string format_double(double value);

std::string decoy_mode_name(DecoyMode mode);
DecoyMode decoy_mode_from_name(const std::string& name);

// JSON mappings (nlohmann ADL hooks). Serialization uses shortest round-trip
// number formatting, so dump/parse cycles are bit-exact for finite values.
void to_json(nlohmann::json& j, const ChannelParams& v);
void from_json(const nlohmann::json& j, ChannelParams& v);
void to_json(nlohmann::json& j, const ProtocolParams& v);
void from_json(const nlohmann::json& j, ProtocolParams& v);
void to_json(nlohmann::json& j, const ObservedRates& v);
void from_json(const nlohmann::json& j, ObservedRates& v);
void to_json(nlohmann::json& j, const IntensityTally& v);
void from_json(const nlohmann::json& j, IntensityTally& v);
void to_json(nlohmann::json& j, const TallySet& v);
void from_json(const nlohmann::json& j, TallySet& v);
void to_json(nlohmann::json& j, const DecoyEstimate& v);
void from_json(const nlohmann::json& j, DecoyEstimate& v);
void to_json(nlohmann::json& j, const KeyRateFlags& v);
void from_json(const nlohmann::json& j, KeyRateFlags& v);
void to_json(nlohmann::json& j, const KeyRateReport& v);
void from_json(const nlohmann::json& j, KeyRateReport& v);
void to_json(nlohmann::json& j, const RateComparison& v);

}  // namespace snsqkd

namespace snsqkd::attack {
void to_json(nlohmann::json& j, const AttackSummary& v);
void from_json(const nlohmann::json& j, AttackSummary& v);
}  // namespace snsqkd::attack

namespace snsqkd {

// Scan serialization. CSV columns:
//   axis_value,rate,optimized_epsilon,optimized_mu_signal,e1ph_upper,e_z,s_z,flags
// flags is a ';'-joined token list, "-" when empty.
std::string flags_token(const KeyRateFlags& flags);
std::string scan_csv(const std::vector<ScanPoint>& points);

struct ScanCsvRow {
    double axis_value = 0.0;
    double rate = 0.0;
    double optimized_epsilon = 0.0;
    double optimized_mu_signal = 0.0;
    double e1ph_upper = 0.0;
    double e_z = 0.0;
    double s_z = 0.0;
    std::string flags;
};

std::vector<ScanCsvRow> parse_scan_csv(const std::string& text);

nlohmann::json scan_json(const std::vector<ScanPoint>& points);

// Flat key=value config file: '#' starts a comment, blank lines ignored,
// whitespace around keys/values trimmed, later duplicates win. Lines without
// '=' raise std::runtime_error naming the line.
std::map<std::string, std::string> parse_config_text(const std::string& text);

}  // namespace snsqkd
