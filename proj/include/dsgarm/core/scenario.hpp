#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dsgarm/core/types.hpp"

namespace dsgarm {

enum class ErrorCode {
    InvalidWeight,
    InvalidBounds,
    LayoutOverflow,
    EmptyNetwork,
    InvalidBlocking,
    InvalidRange,
    MixMismatch,
    DuplicateClass,
};

std::string_view to_string(ErrorCode c);

struct ScenarioError {
    ErrorCode code;
    std::string field;
    std::string message;

    bool operator==(const ScenarioError&) const = default;
};

/// Either the validated scenario or every violation found, ordered by field.
class ValidationResult {
public:
    explicit ValidationResult(Scenario sc) : value_(std::move(sc)) {}
    explicit ValidationResult(std::vector<ScenarioError> errs) : value_(std::move(errs)) {}

    bool ok() const { return std::holds_alternative<Scenario>(value_); }
    const Scenario& scenario() const { return std::get<Scenario>(value_); }
    const std::vector<ScenarioError>& errors() const {
        return std::get<std::vector<ScenarioError>>(value_);
    }

private:
    std::variant<Scenario, std::vector<ScenarioError>> value_;
};

ValidationResult validate_scenario(const Scenario& raw);

class InvalidScenario : public std::runtime_error {
public:
    explicit InvalidScenario(std::vector<ScenarioError> errs);
    const std::vector<ScenarioError>& errors() const { return errors_; }

private:
    std::vector<ScenarioError> errors_;
};

/// Returns the scenario or throws InvalidScenario.
Scenario checked(const Scenario& raw);

/// Malformed file: syntax, wrong types, unknown keys.
class ScenarioParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);
Scenario load_scenario(const std::string& path);

/// The six traffic classes of the reference setup (E_0..E_5) with E_0, E_1
/// real-time over absolute reservation and the rest ordinary traffic.
std::vector<TrafficClass> reference_classes();

/// Reference-parameter scenario with the given node count and traffic shares.
Scenario reference_scenario(int nodes, const std::vector<double>& shares = {0.1, 0.2, 0.1, 0.1, 0.2, 0.3});

/// Rescale class_mix to a new total node count, keeping proportions
/// (largest-remainder rounding), and rebuild the population.
Scenario with_node_count(const Scenario& sc, int nodes);

/// Split `nodes` over integer ratio parts with largest-remainder rounding.
std::vector<int> apportion(int nodes, const std::vector<double>& shares);

}  // namespace dsgarm
