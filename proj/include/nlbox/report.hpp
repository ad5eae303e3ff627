#pragma once

// Reports: protocol results plus a scenario echo under a versioned schema.
// JSON output is byte-stable for equal inputs and reads back to an equal
// Report; CSV output is a flat, plot-ready table.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include <json.hpp>

#include "nlbox/protocols.hpp"
#include "nlbox/scenario.hpp"
#include "nlbox/witness.hpp"

namespace nlbox {

inline constexpr std::string_view kReportSchema = "nlbox-report/1";

struct WitnessSummary {
    std::size_t dim_in = 0;
    std::size_t dim_out = 0;
    std::size_t rows = 0;
    bool sampled = false;
    double residual = 0.0;
    double choi_min_eig = 0.0;
    double tolerance = 0.0;
    bool linear_explainable = false;

    friend bool operator==(const WitnessSummary&, const WitnessSummary&) = default;
};

struct AffinitySummary {
    std::string first;
    std::string second;
    std::string semantics;
    double violation = 0.0;

    friend bool operator==(const AffinitySummary&, const AffinitySummary&) = default;
};

using ProtocolResult = std::variant<VerificationReport, SignalingReport, ClassSplitReport, AttackReport,
                                    WitnessSummary, AffinitySummary>;

struct Report {
    std::string schema{kReportSchema};
    std::string name;
    std::string protocol;
    std::uint64_t seed = 0;
    /// Scenario document (or stats-file summary) the result came from.
    nlohmann::ordered_json scenario;
    ProtocolResult result;

    friend bool operator==(const Report&, const Report&) = default;
};

WitnessSummary summarize_witness(const StatsTable& t, std::optional<double> tol);

/// Dispatches to the protocol selected by the config.
Report run_scenario(const ScenarioConfig& config);

/// Linearity witness of a stats file.
Report run_witness_file(const std::filesystem::path& path, std::optional<double> tol);

nlohmann::ordered_json to_json(const Report& r);
/// ParseError when the document does not follow the schema.
Report report_from_json(const nlohmann::ordered_json& j);

void emit_table(const Report& r, OutputFormat format, std::ostream& os);
std::string render(const Report& r, OutputFormat format);
/// IoError with the path on failure; parent directories are created.
void write_report(const Report& r, OutputFormat format, const std::filesystem::path& path);

}  // namespace nlbox
