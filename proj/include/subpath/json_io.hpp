// JSON experiment configs — parsing plus the model/table/shift/cylinder
// builders each subcommand needs — and deterministic JSON/CSV serialization
// of every report type.
#pragma once

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subpath/harness.hpp"

namespace subpath {

// A config document failed validation; the message names the field.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    nlohmann::json raw;
    std::string family;  // deterministic | gamma | stable | compound_poisson | log
    double T = 1.0;
    double kappa = 0.0;
    MCOptions mc;
    bool override_preconditions = false;
    std::optional<std::string> out_path;
    std::optional<std::string> csv_path;
};

// Parses and validates the shared fields; throws ConfigError naming the
// offending field. Family-specific pieces are validated by the builders
// below when a subcommand actually asks for them.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

// family -> Bernstein function (every family, including sampler-free "log")
BernsteinFunction config_bernstein(const ExperimentConfig& cfg);

// family -> sampling model; rejects "log", which has no exact transition law
SubordinatorModel config_model(const ExperimentConfig& cfg);

// survival table per the optional "tail_table" block: exact closed forms
// where the family has one, a Monte Carlo fit with monotone pooling otherwise
TailTable config_table(const ExperimentConfig& cfg);

WeightedSpace config_space(const ExperimentConfig& cfg);

bool config_has(const ExperimentConfig& cfg, const char* key);
ShiftFunction config_shift(const ExperimentConfig& cfg, const char* key = "shift");
CylinderFunction config_cylinder(const ExperimentConfig& cfg, const char* key = "cylinder");
std::vector<double> config_grid(const ExperimentConfig& cfg, const char* key,
                                std::vector<double> fallback);
double config_number(const ExperimentConfig& cfg, const char* key, double fallback);
int config_int(const ExperimentConfig& cfg, const char* key, int fallback);

// finite -> JSON number; infinities and NaN -> strings, keeping reports valid
nlohmann::json json_number(double x);

nlohmann::json to_json(const MCResult& r);
nlohmann::json to_json(const MembershipReport& r);
nlohmann::json to_json(const QiReport& r);
nlohmann::json to_json(const IbpReport& r);
nlohmann::json to_json(const EnergyReport& r);
nlohmann::json to_json(const TailCheckReport& r);
nlohmann::json to_json(const SeparationReport& r);
nlohmann::json to_json(const HpReport& r);
nlohmann::json to_json(const IndexReport& r);

void write_text_file(const std::string& path, const std::string& text);
std::string csv_number(double x);
std::string csv_join(const std::vector<std::string>& cells);

}  // namespace subpath
