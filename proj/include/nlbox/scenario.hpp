#pragma once

// Scenario files: JSON documents with a strict schema (unknown keys are
// rejected). Layout of a scenario:
//
//   {
//     "name": "signaling_naive",
//     "protocol": "verify" | "signaling" | "split" | "bb84" | "affinity" | "witness",
//     "seed": 42,                                   optional, default 0
//     "box": {
//       "kind": "brun" | "deutsch" | "kent" | "linear",
//       "event": {"t": 1, "x": 0},                  default (1, 0)
//       "semantics": "state" | "decomposition",     default decomposition
//       "membership": {"kind": "naive_pure" | "kent_light_cone" |
//                      "deterministic_experimenter" | "explicit_list",
//                      "event": {...}, "labels": [...]},
//       brun / kent: "psi", "phi"                   basis name or [[re, im], [re, im]] pairs
//       brun:        "completion": "strict" | "identity"
//       deutsch:     "unitary", "ctc_dim", "fixed_point": {"tolerance", "max_iterations"}
//       linear:      "unitary" | "kraus" | "random": {"dim_in", "dim_out", "env", "seed"}
//     },
//     "layout": {"alice": {"t", "x"}, "local": {"t", "x"}},
//     "preparations": [
//       {"label": "a", "ensemble": [{"weight": 1, "state": <state>}],
//        "provenance": {"tag": "local_deterministic", "records": [{"t", "x"}]}}
//     ],
//     "params": {...},
//     "output": {"path": "report.json", "format": "json" | "csv"}
//   }
//
// Basis names: computational, hadamard, circular. A <state> is a ket name
// (zero, one, plus, minus, plus_i, minus_i), an amplitude list, or
// {"density": [[[re, im], ...], ...]}. A unitary is a name (identity, swap,
// cnot, cnot_swap) or a matrix of [re, im] entries.
//
// params (all optional): settings ["psi", "phi"], tol, n_bits, mode
// (exact | sampled), eve (identified | fixed_basis), pair [label, label],
// inputs [label, ...], shots.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlbox/boxes.hpp"
#include "nlbox/protocols.hpp"

namespace nlbox {

enum class Protocol { kVerify, kSignaling, kSplit, kBb84, kAffinity, kWitness };

std::string_view to_string(Protocol p);
Protocol protocol_from_string(std::string_view name);

enum class OutputFormat { kJson, kCsv };

std::string_view to_string(OutputFormat f);
OutputFormat output_format_from_string(std::string_view name);

struct ScenarioParams {
    std::vector<std::string> settings{"psi", "phi"};
    /// Verification defaults to 1e-9, the witness to its binomial rule.
    std::optional<double> tol;
    std::uint64_t n_bits = 10000;
    SimulationMode mode = SimulationMode::kExact;
    EveStrategy eve = EveStrategy::kIdentified;
    std::optional<std::pair<std::string, std::string>> pair;
    std::vector<std::string> inputs;
    /// Per-cell samples for a sampled witness table; 0 keeps it exact.
    std::uint64_t shots = 0;
};

struct ScenarioConfig {
    std::string name;
    Protocol protocol = Protocol::kVerify;
    std::uint64_t seed = 0;
    NonlinearBox box;
    Layout layout;
    std::vector<Preparation> preparations;
    ScenarioParams params;
    std::optional<std::string> output_path;
    OutputFormat output_format = OutputFormat::kJson;
    /// The document as read, echoed into reports.
    nlohmann::ordered_json source;
};

/// ParseError for malformed text or schema violations, ValidationError for
/// bad physics, ReferenceError for unresolved labels. Messages start with
/// `origin` and the JSON path of the offending field.
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin = "<scenario>");
ScenarioConfig parse_scenario(const std::filesystem::path& path);

const Preparation& find_preparation(const ScenarioConfig& config, const std::string& label);

}  // namespace nlbox
