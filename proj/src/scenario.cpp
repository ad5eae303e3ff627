#include "nlbox/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nlbox/errors.hpp"
#include "nlbox/random.hpp"

namespace nlbox {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail_parse(const std::string& path, const std::string& msg) {
    throw ParseError(path + ": " + msg);
}

/// Read-only view of a JSON value together with its path in the document.
class Node {
public:
    Node(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const Json& json() const { return *j_; }
    const std::string& path() const { return path_; }

    void require_object(std::initializer_list<std::string_view> allowed) const {
        if (!j_->is_object()) fail_parse(path_, "expected an object");
        for (const auto& [key, _] : j_->items()) {
            bool known = false;
            for (auto a : allowed) known = known || a == key;
            if (!known) fail_parse(child_path(key), "unknown key");
        }
    }

    bool has(const std::string& key) const { return j_->contains(key); }

    Node at(const std::string& key) const {
        if (!j_->contains(key)) fail_parse(child_path(key), "missing required key");
        return Node((*j_)[key], child_path(key));
    }

    Node at(std::size_t i) const { return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]"); }

    std::vector<Node> array() const {
        if (!j_->is_array()) fail_parse(path_, "expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < j_->size(); ++i) out.push_back(at(i));
        return out;
    }

    std::string string() const {
        if (!j_->is_string()) fail_parse(path_, "expected a string");
        return j_->get<std::string>();
    }

    double number() const {
        if (!j_->is_number()) fail_parse(path_, "expected a number");
        const double v = j_->get<double>();
        if (!std::isfinite(v)) fail_parse(path_, "expected a finite number");
        return v;
    }

    std::uint64_t unsigned_integer() const {
        if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0)) {
            fail_parse(path_, "expected a non-negative integer");
        }
        return j_->get<std::uint64_t>();
    }

    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const Json* j_;
    std::string path_;
};

/// Runs `f`, prefixing any library error with the field path.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        const std::string msg = path + ": " + e.what();
        switch (e.exit_code()) {
            case ExitCode::kParse: throw ParseError(msg);
            case ExitCode::kConvergence: throw ConvergenceError(msg);
            case ExitCode::kIo: throw IoError(msg);
            default: throw ValidationError(msg);
        }
    }
}

template <class T, class F>
T enum_field(const Node& n, F&& from_string) {
    const std::string s = n.string();
    try {
        return from_string(s);
    } catch (const Error&) {
        fail_parse(n.path(), "unknown value '" + s + "'");
    }
}

Complex complex_value(const Node& n) {
    if (n.json().is_number()) return {n.number(), 0.0};
    const auto parts = n.array();
    if (parts.size() != 2) fail_parse(n.path(), "expected a number or an [re, im] pair");
    return {parts[0].number(), parts[1].number()};
}

Vector amplitudes(const Node& n) {
    const auto entries = n.array();
    if (entries.empty()) fail_parse(n.path(), "empty amplitude list");
    Vector v(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_value(entries[i]);
    return v;
}

Matrix matrix_value(const Node& n) {
    const auto rows = n.array();
    if (rows.empty()) fail_parse(n.path(), "empty matrix");
    const auto r = static_cast<Eigen::Index>(rows.size());
    Matrix m(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto cols = rows[static_cast<std::size_t>(i)].array();
        if (static_cast<Eigen::Index>(cols.size()) != r) {
            fail_parse(rows[static_cast<std::size_t>(i)].path(), "matrix must be square");
        }
        for (Eigen::Index k = 0; k < r; ++k) m(i, k) = complex_value(cols[static_cast<std::size_t>(k)]);
    }
    return m;
}

KetVector named_ket(const Node& n) {
    const std::string s = n.string();
    if (s == "zero") return kets::zero();
    if (s == "one") return kets::one();
    if (s == "plus") return kets::plus();
    if (s == "minus") return kets::minus();
    if (s == "plus_i") return kets::plus_i();
    if (s == "minus_i") return kets::minus_i();
    fail_parse(n.path(), "unknown state name '" + s + "'");
}

std::array<KetVector, 2> basis_value(const Node& n) {
    if (n.json().is_string()) {
        const std::string s = n.string();
        if (s == "computational") return {kets::zero(), kets::one()};
        if (s == "hadamard") return {kets::plus(), kets::minus()};
        if (s == "circular") return {kets::plus_i(), kets::minus_i()};
        fail_parse(n.path(), "unknown basis name '" + s + "'");
    }
    const auto vectors = n.array();
    if (vectors.size() != 2) fail_parse(n.path(), "a qubit basis needs exactly two vectors");
    std::array<Vector, 2> v{amplitudes(vectors[0]), amplitudes(vectors[1])};
    for (std::size_t i = 0; i < 2; ++i) {
        if (v[i].size() != 2) fail_parse(vectors[i].path(), "basis vectors must have two amplitudes");
    }
    const double n0 = v[0].norm();
    const double n1 = v[1].norm();
    const double overlap = std::abs(v[0].dot(v[1]));
    if (std::abs(n0 - 1.0) > tol::kValid || std::abs(n1 - 1.0) > tol::kValid || overlap > tol::kValid) {
        std::ostringstream msg;
        msg << n.path() << ": basis is not orthonormal (norms " << n0 << ", " << n1 << "; overlap " << overlap
            << ")";
        throw ValidationError(msg.str());
    }
    return {KetVector(v[0]), KetVector(v[1])};
}

SpacetimeEvent event_value(const Node& n) {
    n.require_object({"t", "x"});
    const double t = n.at("t").number();
    const double x = n.at("x").number();
    return at_path(n.path(), [&] { return SpacetimeEvent(t, x); });
}

DensityOperator state_value(const Node& n) {
    if (n.json().is_string()) return DensityOperator::pure(named_ket(n));
    if (n.json().is_object()) {
        n.require_object({"density"});
        const Node d = n.at("density");
        Matrix m = matrix_value(d);
        return at_path(d.path(), [&] { return DensityOperator(std::move(m)); });
    }
    Vector v = amplitudes(n);
    return at_path(n.path(), [&] { return DensityOperator::pure(KetVector(std::move(v))); });
}

Unitary unitary_value(const Node& n) {
    if (n.json().is_string()) {
        const std::string s = n.string();
        try {
            return named_two_qubit_unitary(s);
        } catch (const Error&) {
            fail_parse(n.path(), "unknown unitary name '" + s + "'");
        }
    }
    Matrix m = matrix_value(n);
    return at_path(n.path(), [&] { return Unitary(std::move(m)); });
}

MembershipPolicy membership_value(const Node& n, const SpacetimeEvent& box_event) {
    n.require_object({"kind", "event", "labels"});
    const auto kind = enum_field<MembershipKind>(n.at("kind"), membership_kind_from_string);
    std::optional<SpacetimeEvent> event;
    if (n.has("event")) {
        event = event_value(n.at("event"));
    } else if (kind == MembershipKind::kKentLightCone) {
        event = box_event;
    }
    std::optional<std::set<std::string>> labels;
    if (n.has("labels")) {
        labels.emplace();
        for (const auto& l : n.at("labels").array()) labels->insert(l.string());
    }
    return at_path(n.path(), [&] { return MembershipPolicy(kind, event, labels); });
}

std::pair<std::array<KetVector, 2>, std::array<KetVector, 2>> brun_bases(const Node& n) {
    auto psi = n.has("psi") ? basis_value(n.at("psi")) : std::array<KetVector, 2>{kets::zero(), kets::one()};
    auto phi = n.has("phi") ? basis_value(n.at("phi")) : std::array<KetVector, 2>{kets::plus(), kets::minus()};
    return {std::move(psi), std::move(phi)};
}

BrunBoxConfig brun_value(const Node& n) {
    auto [psi, phi] = brun_bases(n);
    const std::string completion = n.has("completion") ? n.at("completion").string() : "strict";
    if (completion != "strict" && completion != "identity") {
        fail_parse(n.child_path("completion"), "unknown value '" + completion + "'");
    }
    return at_path(n.path(), [&] {
        if (completion == "identity") {
            return BrunBoxConfig(psi, phi,
                                 [](const KetVector& k) { return brun_identity_completion(DensityOperator::pure(k)); },
                                 "identity");
        }
        return BrunBoxConfig(psi, phi);
    });
}

Channel linear_channel(const Node& n) {
    const int given = static_cast<int>(n.has("unitary")) + static_cast<int>(n.has("kraus")) +
                      static_cast<int>(n.has("random"));
    if (given != 1) fail_parse(n.path(), "a linear box needs exactly one of unitary, kraus, random");
    if (n.has("unitary")) return Channel::from_unitary(unitary_value(n.at("unitary")));
    if (n.has("kraus")) {
        std::vector<Matrix> kraus;
        for (const auto& k : n.at("kraus").array()) {
            const auto rows = k.array();
            if (rows.empty()) fail_parse(k.path(), "empty Kraus operator");
            const auto cols = rows.front().array().size();
            Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto entries = rows[i].array();
                if (entries.size() != cols) fail_parse(rows[i].path(), "ragged Kraus operator");
                for (std::size_t c = 0; c < cols; ++c) {
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = complex_value(entries[c]);
                }
            }
            kraus.push_back(std::move(m));
        }
        const Node kn = n.at("kraus");
        return at_path(kn.path(), [&] { return Channel(std::move(kraus)); });
    }
    const Node r = n.at("random");
    r.require_object({"dim_in", "dim_out", "env", "seed"});
    const auto din = r.at("dim_in").unsigned_integer();
    const auto dout = r.has("dim_out") ? r.at("dim_out").unsigned_integer() : din;
    const auto env = r.has("env") ? r.at("env").unsigned_integer() : 2;
    const auto seed = r.has("seed") ? r.at("seed").unsigned_integer() : 0;
    return at_path(r.path(), [&] {
        Rng rng = stream_rng(seed, 0);
        return random_channel(din, dout, env, rng);
    });
}

NonlinearBox box_value(const Node& n) {
    n.require_object({"kind", "event", "semantics", "membership", "psi", "phi", "completion", "unitary",
                      "ctc_dim", "fixed_point", "kraus", "random"});
    const std::string kind = n.at("kind").string();
    const auto allow_only = [&n, &kind](std::initializer_list<std::string_view> keys) {
        std::vector<std::string_view> all{"kind", "event", "semantics", "membership"};
        all.insert(all.end(), keys.begin(), keys.end());
        for (const auto& [key, _] : n.json().items()) {
            if (std::find(all.begin(), all.end(), key) == all.end()) {
                fail_parse(n.child_path(key), "not allowed for a " + kind + " box");
            }
        }
    };

    const SpacetimeEvent event = n.has("event") ? event_value(n.at("event")) : SpacetimeEvent{1.0, 0.0};
    const Semantics semantics =
        n.has("semantics") ? enum_field<Semantics>(n.at("semantics"), semantics_from_string)
                           : Semantics::kDecomposition;
    const MembershipPolicy membership = n.has("membership") ? membership_value(n.at("membership"), event)
                                                            : MembershipPolicy::naive_pure();

    const auto make = [&](BoxKind k) {
        return at_path(n.path(), [&] { return NonlinearBox(std::move(k), event, semantics, membership); });
    };
    if (kind == "brun") {
        allow_only({"psi", "phi", "completion"});
        return make(brun_value(n));
    }
    if (kind == "kent") {
        allow_only({"psi", "phi"});
        auto [psi, phi] = brun_bases(n);
        return make(at_path(n.path(), [&] { return KentBoxConfig::emulating(BrunBoxConfig(psi, phi)); }));
    }
    if (kind == "deutsch") {
        allow_only({"unitary", "ctc_dim", "fixed_point"});
        const Unitary u = unitary_value(n.at("unitary"));
        const auto ctc_dim = n.has("ctc_dim") ? n.at("ctc_dim").unsigned_integer() : 2;
        FixedPointOptions opts;
        if (n.has("fixed_point")) {
            const Node fp = n.at("fixed_point");
            fp.require_object({"tolerance", "max_iterations"});
            if (fp.has("tolerance")) opts.tolerance = fp.at("tolerance").number();
            if (fp.has("max_iterations")) opts.max_iterations = fp.at("max_iterations").unsigned_integer();
        }
        return make(at_path(n.path(), [&] { return DeutschBoxConfig(u, ctc_dim, opts); }));
    }
    if (kind == "linear") {
        allow_only({"unitary", "kraus", "random"});
        return make(LinearBoxConfig{linear_channel(n)});
    }
    fail_parse(n.child_path("kind"), "unknown box kind '" + kind + "'");
}

Preparation preparation_value(const Node& n) {
    n.require_object({"label", "ensemble", "provenance"});
    const std::string label = n.at("label").string();
    if (label.empty()) fail_parse(n.child_path("label"), "label must be non-empty");
    std::vector<EnsembleMember> ensemble;
    for (const auto& m : n.at("ensemble").array()) {
        m.require_object({"weight", "state"});
        const double w = m.has("weight") ? m.at("weight").number() : 1.0;
        ensemble.push_back({w, state_value(m.at("state"))});
    }
    const Node pn = n.at("provenance");
    pn.require_object({"tag", "records"});
    const auto tag = enum_field<ProvenanceTag>(pn.at("tag"), provenance_tag_from_string);
    std::vector<SpacetimeEvent> records;
    for (const auto& r : pn.at("records").array()) records.push_back(event_value(r));
    return at_path(n.path(), [&] {
        return Preparation(label, std::move(ensemble), Provenance(tag, std::move(records)));
    });
}

ScenarioParams params_value(const Node& n) {
    n.require_object({"settings", "tol", "n_bits", "mode", "eve", "pair", "inputs", "shots"});
    ScenarioParams p;
    if (n.has("settings")) {
        p.settings.clear();
        for (const auto& s : n.at("settings").array()) p.settings.push_back(s.string());
    }
    if (n.has("tol")) {
        p.tol = n.at("tol").number();
        if (!(*p.tol >= 0.0)) throw ValidationError(n.child_path("tol") + ": tolerance must be non-negative");
    }
    if (n.has("n_bits")) p.n_bits = n.at("n_bits").unsigned_integer();
    if (n.has("mode")) p.mode = enum_field<SimulationMode>(n.at("mode"), simulation_mode_from_string);
    if (n.has("eve")) p.eve = enum_field<EveStrategy>(n.at("eve"), eve_strategy_from_string);
    if (n.has("pair")) {
        const auto pair = n.at("pair").array();
        if (pair.size() != 2) fail_parse(n.child_path("pair"), "expected two labels");
        p.pair.emplace(pair[0].string(), pair[1].string());
    }
    if (n.has("inputs")) {
        for (const auto& s : n.at("inputs").array()) p.inputs.push_back(s.string());
    }
    if (n.has("shots")) p.shots = n.at("shots").unsigned_integer();
    return p;
}

void check_references(const ScenarioConfig& c, const std::string& origin) {
    std::set<std::string> labels;
    for (std::size_t i = 0; i < c.preparations.size(); ++i) {
        if (!labels.insert(c.preparations[i].label()).second) {
            throw ValidationError(origin + ": preparations[" + std::to_string(i) + "].label: duplicate label '" +
                                  c.preparations[i].label() + "'");
        }
    }
    const auto resolve = [&](const std::string& label, const std::string& path) {
        if (!labels.contains(label)) {
            throw ReferenceError(origin + ": " + path + ": undefined preparation label '" + label + "'");
        }
    };
    if (c.params.pair) {
        resolve(c.params.pair->first, "params.pair[0]");
        resolve(c.params.pair->second, "params.pair[1]");
    }
    for (std::size_t i = 0; i < c.params.inputs.size(); ++i) {
        resolve(c.params.inputs[i], "params.inputs[" + std::to_string(i) + "]");
    }
    for (std::size_t i = 0; i < c.preparations.size(); ++i) {
        if (c.preparations[i].dim() != c.box.input_dim()) {
            throw ValidationError(origin + ": preparations[" + std::to_string(i) + "]: dimension " +
                                  std::to_string(c.preparations[i].dim()) + " does not match the box input " +
                                  std::to_string(c.box.input_dim()));
        }
    }
    if (c.protocol == Protocol::kAffinity && !c.params.pair) {
        throw ValidationError(origin + ": params.pair: the affinity protocol needs a preparation pair");
    }
    if (c.protocol == Protocol::kSignaling) {
        std::vector<AliceSetting> settings;
        for (std::size_t i = 0; i < c.params.settings.size(); ++i) {
            const std::string path = "params.settings[" + std::to_string(i) + "]";
            settings.push_back(at_path(origin + ": " + path, [&] { return named_setting(c.box, c.params.settings[i]); }));
        }
        at_path(origin + ": params.settings", [&] { validate_settings(c.box, settings); });
    }
}

}  // namespace

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::kVerify: return "verify";
        case Protocol::kSignaling: return "signaling";
        case Protocol::kSplit: return "split";
        case Protocol::kBb84: return "bb84";
        case Protocol::kAffinity: return "affinity";
        case Protocol::kWitness: return "witness";
    }
    return "verify";
}

Protocol protocol_from_string(std::string_view name) {
    for (auto p : {Protocol::kVerify, Protocol::kSignaling, Protocol::kSplit, Protocol::kBb84,
                   Protocol::kAffinity, Protocol::kWitness}) {
        if (to_string(p) == name) return p;
    }
    throw ValidationError("unknown protocol '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::kJson ? "json" : "csv"; }

OutputFormat output_format_from_string(std::string_view name) {
    if (name == "json") return OutputFormat::kJson;
    if (name == "csv") return OutputFormat::kCsv;
    throw ValidationError("unknown output format '" + std::string(name) + "'");
}

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    try {
        const Node root(doc, "");
        root.require_object({"name", "protocol", "seed", "box", "layout", "preparations", "params", "output"});
        const std::string name = root.at("name").string();
        const auto protocol = enum_field<Protocol>(root.at("protocol"), protocol_from_string);
        const std::uint64_t seed = root.has("seed") ? root.at("seed").unsigned_integer() : 0;
        NonlinearBox box = box_value(root.at("box"));

        Layout layout;
        if (root.has("layout")) {
            const Node l = root.at("layout");
            l.require_object({"alice", "local"});
            if (l.has("alice")) layout.alice = event_value(l.at("alice"));
            if (l.has("local")) layout.local = event_value(l.at("local"));
        }

        std::vector<Preparation> preps;
        if (root.has("preparations")) {
            for (const auto& p : root.at("preparations").array()) preps.push_back(preparation_value(p));
        }
        const ScenarioParams params = root.has("params") ? params_value(root.at("params")) : ScenarioParams{};

        std::optional<std::string> out_path;
        OutputFormat format = OutputFormat::kJson;
        if (root.has("output")) {
            const Node o = root.at("output");
            o.require_object({"path", "format"});
            if (o.has("path")) out_path = o.at("path").string();
            if (o.has("format")) format = enum_field<OutputFormat>(o.at("format"), output_format_from_string);
        }

        ScenarioConfig config{name,   protocol, seed,   std::move(box), layout,
                              std::move(preps), params, out_path, format, doc};
        check_references(config, origin);
        return config;
    } catch (const ReferenceError&) {
        throw;
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind(origin + ": ", 0) == 0) throw;
        const std::string msg = origin + ": " + what;
        if (e.exit_code() == ExitCode::kParse) throw ParseError(msg);
        throw ValidationError(msg);
    }
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path.string());
}

const Preparation& find_preparation(const ScenarioConfig& config, const std::string& label) {
    for (const auto& p : config.preparations) {
        if (p.label() == label) return p;
    }
    throw ReferenceError("undefined preparation label '" + label + "'");
}

}  // namespace nlbox
