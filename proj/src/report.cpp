#include "nlbox/report.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "nlbox/errors.hpp"
#include "nlbox/kernels.hpp"
#include "nlbox/witness.hpp"

namespace nlbox {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<const char*, 4> kTwoBit{"00", "01", "10", "11"};

/// Shortest round-trip decimal form, identical to the JSON rendering.
std::string num(double v) { return Json(v).dump(); }

std::size_t qubits_of(std::size_t dim) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim) ++n;
    if ((std::size_t{1} << n) != dim) throw ShapeError("witness: output dim " + std::to_string(dim) + " is not a power of two");
    return n;
}

// --- per-result JSON ------------------------------------------------------------------

Json result_json(const VerificationReport& r) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.inputs.size(); ++i) {
        rows.push_back({{"input", r.inputs[i]},
                        {"probabilities", r.probabilities[i]},
                        {"transition_probability", r.transition_probabilities[i]}});
    }
    return {{"type", "verification"}, {"tol", r.tol}, {"identified", r.identified}, {"rows", rows}};
}

Json result_json(const SignalingReport& r) {
    Json settings = Json::array();
    for (const auto& s : r.settings) {
        settings.push_back({{"name", s.name},
                            {"alice_probabilities", s.alice_probabilities},
                            {"bob_distribution", s.bob_distribution}});
    }
    return {{"type", "signaling"},
            {"policy", r.policy},
            {"semantics", r.semantics},
            {"signaling_metric", r.signaling_metric},
            {"settings", settings}};
}

Json result_json(const ClassSplitReport& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"state", e.state},
                           {"verifying_label", e.verifying_label},
                           {"remote_label", e.remote_label},
                           {"linearly_equivalent", e.linearly_equivalent},
                           {"verifying_member", e.verifying_member},
                           {"remote_member", e.remote_member},
                           {"output_distance", e.output_distance}});
    }
    return {{"type", "split"}, {"policy", r.policy}, {"split", r.split}, {"hazard", r.hazard}, {"entries", entries}};
}

Json result_json(const AttackReport& r) {
    return {{"type", "bb84"},
            {"n_bits", r.n_bits},
            {"sifted_bits", r.sifted_bits},
            {"eve_bit_accuracy", r.eve_bit_accuracy},
            {"eve_basis_accuracy", r.eve_basis_accuracy},
            {"induced_qber", r.induced_qber},
            {"sifted_key_fraction", r.sifted_key_fraction}};
}

Json result_json(const WitnessSummary& r) {
    return {{"type", "witness"},
            {"dim_in", r.dim_in},
            {"dim_out", r.dim_out},
            {"rows", r.rows},
            {"sampled", r.sampled},
            {"residual", r.residual},
            {"choi_min_eig", r.choi_min_eig},
            {"tolerance", r.tolerance},
            {"linear_explainable", r.linear_explainable}};
}

Json result_json(const AffinitySummary& r) {
    return {{"type", "affinity"},
            {"first", r.first},
            {"second", r.second},
            {"semantics", r.semantics},
            {"violation", r.violation}};
}

template <class T>
T get(const Json& j, const char* key) {
    if (!j.contains(key)) throw ParseError("report: missing key '" + std::string(key) + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("report: bad value for '" + std::string(key) + "': " + e.what());
    }
}

ProtocolResult result_from_json(const Json& j) {
    const auto type = get<std::string>(j, "type");
    if (type == "verification") {
        VerificationReport r;
        r.tol = get<double>(j, "tol");
        r.identified = get<bool>(j, "identified");
        for (const auto& row : get<Json>(j, "rows")) {
            r.inputs.push_back(get<std::string>(row, "input"));
            r.probabilities.push_back(get<std::array<double, 4>>(row, "probabilities"));
            r.transition_probabilities.push_back(get<double>(row, "transition_probability"));
        }
        return r;
    }
    if (type == "signaling") {
        SignalingReport r;
        r.policy = get<std::string>(j, "policy");
        r.semantics = get<std::string>(j, "semantics");
        r.signaling_metric = get<double>(j, "signaling_metric");
        for (const auto& s : get<Json>(j, "settings")) {
            r.settings.push_back({get<std::string>(s, "name"), get<std::vector<double>>(s, "alice_probabilities"),
                                  get<std::array<double, 2>>(s, "bob_distribution")});
        }
        return r;
    }
    if (type == "split") {
        ClassSplitReport r;
        r.policy = get<std::string>(j, "policy");
        r.split = get<bool>(j, "split");
        r.hazard = get<bool>(j, "hazard");
        for (const auto& e : get<Json>(j, "entries")) {
            r.entries.push_back({get<std::string>(e, "state"), get<std::string>(e, "verifying_label"),
                                 get<std::string>(e, "remote_label"), get<bool>(e, "linearly_equivalent"),
                                 get<bool>(e, "verifying_member"), get<bool>(e, "remote_member"),
                                 get<double>(e, "output_distance")});
        }
        return r;
    }
    if (type == "bb84") {
        return AttackReport{get<std::uint64_t>(j, "n_bits"),       get<std::uint64_t>(j, "sifted_bits"),
                            get<double>(j, "eve_bit_accuracy"),    get<double>(j, "eve_basis_accuracy"),
                            get<double>(j, "induced_qber"),        get<double>(j, "sifted_key_fraction")};
    }
    if (type == "witness") {
        return WitnessSummary{get<std::size_t>(j, "dim_in"),  get<std::size_t>(j, "dim_out"),
                              get<std::size_t>(j, "rows"),    get<bool>(j, "sampled"),
                              get<double>(j, "residual"),     get<double>(j, "choi_min_eig"),
                              get<double>(j, "tolerance"),    get<bool>(j, "linear_explainable")};
    }
    if (type == "affinity") {
        return AffinitySummary{get<std::string>(j, "first"), get<std::string>(j, "second"),
                               get<std::string>(j, "semantics"), get<double>(j, "violation")};
    }
    throw ParseError("report: unknown result type '" + type + "'");
}

// --- CSV ----------------------------------------------------------------------------------

void csv(std::ostream& os, const VerificationReport& r) {
    os << "input,outcome,probability\n";
    for (std::size_t i = 0; i < r.inputs.size(); ++i) {
        for (std::size_t k = 0; k < 4; ++k) os << r.inputs[i] << ',' << kTwoBit[k] << ',' << num(r.probabilities[i][k]) << '\n';
    }
}

void csv(std::ostream& os, const SignalingReport& r) {
    os << "setting,outcome,probability\n";
    for (const auto& s : r.settings) {
        for (std::size_t b = 0; b < 2; ++b) os << s.name << ',' << b << ',' << num(s.bob_distribution[b]) << '\n';
    }
    os << "signaling_metric,," << num(r.signaling_metric) << '\n';
}

void csv(std::ostream& os, const ClassSplitReport& r) {
    os << "state,verifying_label,remote_label,linearly_equivalent,verifying_member,remote_member,output_distance\n";
    for (const auto& e : r.entries) {
        os << e.state << ',' << e.verifying_label << ',' << e.remote_label << ',' << e.linearly_equivalent << ','
           << e.verifying_member << ',' << e.remote_member << ',' << num(e.output_distance) << '\n';
    }
    os << "split,,,,,," << r.split << '\n' << "hazard,,,,,," << r.hazard << '\n';
}

void metric_rows(std::ostream& os, const Json& j) {
    os << "metric,value\n";
    for (const auto& [key, value] : j.items()) {
        if (key == "type") continue;
        os << key << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
}

}  // namespace

WitnessSummary summarize_witness(const StatsTable& t, std::optional<double> tol) {
    const LinearFit fit = fit_linear_map(t);
    WitnessSummary s;
    s.dim_in = t.dim_in();
    s.dim_out = t.dim_out();
    s.rows = t.preparations().size();
    s.sampled = t.sampled();
    s.residual = fit.residual;
    s.choi_min_eig = fit.choi_min_eig;
    s.tolerance = tol.value_or(default_linearity_tolerance(t));
    s.linear_explainable = is_linear_explainable(t, s.tolerance);
    return s;
}

Report run_scenario(const ScenarioConfig& config) {
    Report report;
    report.name = config.name;
    report.protocol = std::string(to_string(config.protocol));
    report.seed = config.seed;
    report.scenario = config.source;
    const auto& box = config.box;
    const auto& p = config.params;

    switch (config.protocol) {
        case Protocol::kVerify:
            report.result = run_verification(box, p.tol.value_or(1e-9), config.layout);
            break;
        case Protocol::kSignaling: {
            std::vector<AliceSetting> settings;
            for (const auto& name : p.settings) settings.push_back(named_setting(box, name));
            report.result = run_signaling_test(box, settings, config.layout);
            break;
        }
        case Protocol::kSplit:
            report.result = run_preparation_problem_demo(box, config.layout);
            break;
        case Protocol::kBb84:
            report.result = run_bb84_attack(box, Bb84Options{p.n_bits, config.seed, p.mode, p.eve, true}, config.layout);
            break;
        case Protocol::kAffinity: {
            if (!p.pair) throw ValidationError("affinity: params.pair is required");
            const auto& a = find_preparation(config, p.pair->first);
            const auto& b = find_preparation(config, p.pair->second);
            report.result = AffinitySummary{a.label(), b.label(), std::string(to_string(box.semantics())),
                                            affinity_violation(box, {a, b})};
            break;
        }
        case Protocol::kWitness: {
            std::vector<Preparation> rows;
            if (p.inputs.empty()) {
                rows = witness_preparations(reference_bases(box), config.layout.local_event(box.event()));
            } else {
                for (const auto& label : p.inputs) rows.push_back(find_preparation(config, label));
            }
            StatsTable table = tabulate_box(box, rows, pauli_measurements(qubits_of(box.output_dim())));
            if (p.shots > 0) table = sample_table_parallel(table, p.shots, config.seed);
            report.result = summarize_witness(table, p.tol);
            break;
        }
    }
    return report;
}

Report run_witness_file(const std::filesystem::path& path, std::optional<double> tol) {
    const StatsTable table = load_stats(path.string());
    Report report;
    report.name = path.stem().string();
    report.protocol = "witness";
    report.scenario = Json{{"stats_file", path.filename().string()}};
    report.result = summarize_witness(table, tol);
    return report;
}

nlohmann::ordered_json to_json(const Report& r) {
    return Json{{"schema", r.schema},
                {"name", r.name},
                {"protocol", r.protocol},
                {"seed", r.seed},
                {"scenario", r.scenario},
                {"result", std::visit([](const auto& x) { return result_json(x); }, r.result)}};
}

Report report_from_json(const nlohmann::ordered_json& j) {
    Report r;
    r.schema = get<std::string>(j, "schema");
    if (r.schema != kReportSchema) throw ParseError("report: unsupported schema '" + r.schema + "'");
    r.name = get<std::string>(j, "name");
    r.protocol = get<std::string>(j, "protocol");
    r.seed = get<std::uint64_t>(j, "seed");
    r.scenario = get<Json>(j, "scenario");
    r.result = result_from_json(get<Json>(j, "result"));
    return r;
}

void emit_table(const Report& r, OutputFormat format, std::ostream& os) {
    if (format == OutputFormat::kJson) {
        os << to_json(r).dump(2) << '\n';
        return;
    }
    std::visit(
        [&os](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, VerificationReport> || std::is_same_v<T, SignalingReport> ||
                          std::is_same_v<T, ClassSplitReport>) {
                csv(os, x);
            } else {
                metric_rows(os, result_json(x));
            }
        },
        r.result);
}

std::string render(const Report& r, OutputFormat format) {
    std::ostringstream os;
    emit_table(r, format, os);
    return os.str();
}

void write_report(const Report& r, OutputFormat format, const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << render(r, format);
    if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace nlbox
