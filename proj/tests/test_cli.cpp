#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli_app.hpp"
#include "nlbox/errors.hpp"
#include "nlbox/report.hpp"
#include "nlbox/scenario.hpp"
#include "oracles.hpp"

using namespace nlbox;
namespace fs = std::filesystem;

namespace {

fs::path scenarios() { return fs::path(oracle::source_dir()) / "scenarios"; }
fs::path broken() { return fs::path(oracle::source_dir()) / "tests" / "data" / "broken"; }

std::vector<fs::path> files_with(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nlbox_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

Report run_named(const std::string& stem) { return run_scenario(parse_scenario(scenarios() / (stem + ".scn"))); }

class ScopedEnv {
public:
    ScopedEnv(const char* name, const std::string& value) : name_(name) { ::setenv(name, value.c_str(), 1); }
    ~ScopedEnv() { ::unsetenv(name_); }

private:
    const char* name_;
};

}  // namespace

TEST_CASE("every bundled scenario parses and runs") {
    const auto files = files_with(scenarios(), ".scn");
    CHECK(files.size() >= 10);
    for (const auto& f : files) {
        CAPTURE(f.string());
        const auto config = parse_scenario(f);
        CHECK(config.name == f.stem().string());
        CHECK_NOTHROW(run_scenario(config));
    }
    const auto naive = parse_scenario(scenarios() / "signaling_naive.scn");
    CHECK(naive.box.membership().kind() == MembershipKind::kNaivePure);
    CHECK(naive.box.semantics() == Semantics::kDecomposition);
    CHECK(naive.protocol == Protocol::kSignaling);
}

TEST_CASE("broken configurations fail with the expected exit code") {
    const auto files = files_with(broken(), ".scn");
    CHECK(files.size() >= 10);
    const std::regex name_rule("exit([0-9])_.*");
    for (const auto& f : files) {
        CAPTURE(f.string());
        std::smatch m;
        const std::string stem = f.stem().string();
        REQUIRE(std::regex_match(stem, m, name_rule));
        const int expected = std::stoi(m[1]);
        const auto r = invoke({"run", f.string()});
        CHECK(r.code == expected);
        CHECK(r.out.empty());
        CHECK(r.err.rfind("nlbox: error: ", 0) == 0);
        CHECK(r.err.find(f.string()) != std::string::npos);
        fs::path expect = f;
        expect.replace_extension(".expect");
        if (fs::exists(expect)) {
            std::string needle = slurp(expect);
            needle.erase(needle.find_last_not_of("\n\r ") + 1);
            CHECK(r.err.find(needle) != std::string::npos);
        }
        // The library reports the same class of error.
        try {
            parse_scenario(f);
            FAIL("parse_scenario accepted a broken file");
        } catch (const Error& e) {
            CHECK(static_cast<int>(e.exit_code()) == expected);
        }
    }
}

TEST_CASE("scenario errors name the offending field") {
    try {
        parse_scenario(broken() / "exit3_undefined_label.scn");
        FAIL("expected ReferenceError");
    } catch (const ReferenceError& e) {
        CHECK(std::string(e.what()).find("params.pair[1]") != std::string::npos);
        CHECK(std::string(e.what()).find("'psi9'") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario(broken() / "exit2_unknown_key.scn"), ParseError);
    CHECK_THROWS_AS(parse_scenario(broken() / "does_not_exist.scn"), IoError);
    CHECK(invoke({"run", (broken() / "does_not_exist.scn").string()}).code == 5);
}

TEST_CASE("inline scenario text and defaults") {
    const auto c = parse_scenario_text(R"({"name": "t", "protocol": "split", "box": {"kind": "brun",
        "membership": {"kind": "kent_light_cone"}}})");
    CHECK(c.box.event() == SpacetimeEvent{1.0, 0.0});
    REQUIRE(c.box.membership().box_event().has_value());
    CHECK(*c.box.membership().box_event() == c.box.event());
    CHECK(c.params.n_bits == 10000);
    CHECK_FALSE(c.output_path.has_value());
    const auto r = run_scenario(c);
    CHECK(std::get<ClassSplitReport>(r.result).split);
    const auto& source = c.source;
    CHECK(source.at("name") == "t");
}

TEST_CASE("bundled scenario results") {
    const auto naive = std::get<SignalingReport>(run_named("signaling_naive").result);
    CHECK(naive.signaling_metric == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::get<SignalingReport>(run_named("signaling_kent").result).signaling_metric < 1e-9);
    CHECK(std::get<SignalingReport>(run_named("signaling_experimenter").result).signaling_metric < 1e-9);
    CHECK(std::get<VerificationReport>(run_named("verify_brun").result).identified);
    CHECK(std::get<ClassSplitReport>(run_named("preparation_split").result).split);
    const auto attack = std::get<AttackReport>(run_named("bb84_attack").result);
    CHECK(attack.eve_bit_accuracy == 1.0);
    CHECK(attack.induced_qber == 0.0);
    const auto ablation = std::get<AttackReport>(run_named("bb84_ablation").result);
    CHECK(std::abs(ablation.induced_qber - 0.25) < 3.0 * std::sqrt(0.1875 / static_cast<double>(ablation.sifted_bits)));
    CHECK(std::get<AffinitySummary>(run_named("brun_affinity").result).violation == doctest::Approx(1.0));
    CHECK(std::get<AffinitySummary>(run_named("deutsch_affinity").result).violation == doctest::Approx(0.5).epsilon(1e-8));
    const auto w = std::get<WitnessSummary>(run_named("witness_brun").result);
    CHECK(w.residual >= 0.49);
    CHECK_FALSE(w.linear_explainable);
    const auto lin = std::get<WitnessSummary>(run_named("witness_linear_sampled").result);
    CHECK(lin.sampled);
    CHECK(lin.linear_explainable);
}

TEST_CASE("CSV shapes") {
    const auto verify = render(run_named("verify_brun"), OutputFormat::kCsv);
    CHECK(verify.rfind("input,outcome,probability\n", 0) == 0);
    CHECK(count_lines(verify) == 17);
    const auto signaling = render(run_named("signaling_naive"), OutputFormat::kCsv);
    CHECK(signaling.rfind("setting,outcome,probability\n", 0) == 0);
    CHECK(count_lines(signaling) == 6);
    CHECK(signaling.find("signaling_metric,,1") != std::string::npos);
    const auto bb84 = render(run_named("bb84_attack"), OutputFormat::kCsv);
    CHECK(bb84.rfind("metric,value\n", 0) == 0);
    CHECK(bb84.find("induced_qber,0") != std::string::npos);
}

TEST_CASE("JSON reports round-trip and are byte-stable") {
    for (const auto& f : files_with(scenarios(), ".scn")) {
        CAPTURE(f.string());
        const auto config = parse_scenario(f);
        const auto a = run_scenario(config);
        const auto json = to_json(a);
        CHECK(json.at("schema") == "nlbox-report/1");
        const auto back = report_from_json(nlohmann::ordered_json::parse(json.dump()));
        CHECK(back == a);
        CHECK(render(back, OutputFormat::kJson) == render(a, OutputFormat::kJson));
        CHECK(render(run_scenario(parse_scenario(f)), OutputFormat::kJson) == render(a, OutputFormat::kJson));
        CHECK(render(run_scenario(config), OutputFormat::kCsv) == render(a, OutputFormat::kCsv));
    }
    CHECK_THROWS_AS(report_from_json(nlohmann::ordered_json::parse(R"({"schema": "other/9"})")), ParseError);
}

TEST_CASE("cli: stdout, --out and the seed override") {
    const auto scn = (scenarios() / "bb84_ablation.scn").string();
    const auto dir = fresh_dir("out");
    const auto a = invoke({"bb84", scn, "--format", "json", "--out", (dir / "a.json").string()});
    CHECK(a.code == 0);
    CHECK(a.out == "wrote " + (dir / "a.json").string() + "\n");
    const auto b = invoke({"bb84", scn, "--format", "json", "--out", (dir / "b.json").string()});
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    const auto c = invoke({"bb84", scn, "--format", "json", "--seed", "8", "--out", (dir / "c.json").string()});
    CHECK(c.code == 0);
    CHECK(slurp(dir / "a.json") != slurp(dir / "c.json"));
    CHECK(slurp(dir / "c.json").find("\"seed\": 8") != std::string::npos);

    // No output path in the scenario: the report goes to stdout.
    const auto inline_dir = fresh_dir("inline");
    std::ofstream(inline_dir / "s.scn") << R"({"name": "s", "protocol": "verify", "box": {"kind": "brun"}})";
    const auto d = invoke({"run", (inline_dir / "s.scn").string(), "--format", "csv"});
    CHECK(d.code == 0);
    CHECK(d.out.rfind("input,outcome,probability", 0) == 0);
}

TEST_CASE("cli: subcommand overrides the scenario protocol") {
    const auto dest = fresh_dir("override") / "v.csv";
    const auto r = invoke({"verify", (scenarios() / "signaling_naive.scn").string(), "--format", "csv", "--out",
                        dest.string()});
    CHECK(r.code == 0);
    CHECK(slurp(dest).rfind("input,", 0) == 0);
}

TEST_CASE("cli: NLBOX_OUT_DIR relocates relative output paths") {
    const auto dir = fresh_dir("env");
    const ScopedEnv env("NLBOX_OUT_DIR", dir.string());
    const auto r = invoke({"run", (scenarios() / "signaling_naive.scn").string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "signaling_naive.json"));
    CHECK(r.out == "wrote " + (dir / "signaling_naive.json").string() + "\n");
}

TEST_CASE("cli: usage errors") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"teleport"}).code == 2);
    CHECK(invoke({"run"}).code == 2);
    CHECK(invoke({"run", (scenarios() / "verify_brun.scn").string(), "--format", "xml"}).code == 2);
    CHECK(invoke({"run", (scenarios() / "verify_brun.scn").string(), "--tol", "-1"}).code == 2);
    const auto help = invoke({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("batch") != std::string::npos);
}

TEST_CASE("cli: witness subcommand on bundled statistics") {
    const auto linear = invoke({"witness", (scenarios() / "identity_channel.stats").string()});
    CHECK(linear.code == 0);
    const auto j = nlohmann::ordered_json::parse(linear.out);
    CHECK(j.at("result").at("linear_explainable") == true);
    const auto sampled = invoke({"witness", (scenarios() / "identity_sampled.stats").string(), "--format", "csv"});
    CHECK(sampled.out.find("sampled,true") != std::string::npos);
    CHECK(sampled.out.find("linear_explainable,true") != std::string::npos);
    const auto brun = invoke({"witness", (scenarios() / "brun_box.stats").string(), "--tol", "1e-3", "--format", "csv"});
    CHECK(brun.out.find("linear_explainable,false") != std::string::npos);
    CHECK(invoke({"witness", (broken() / "nothing.stats").string()}).code == 5);
    const auto garbage = fresh_dir("garbage") / "g.stats";
    std::ofstream(garbage) << "nlbox-stats 1\nmode exact\ndims 2\n";
    CHECK(invoke({"witness", garbage.string()}).code == 2);
}

TEST_CASE("cli: batch runs every scenario and is deterministic") {
    const auto a = fresh_dir("batch_a");
    const auto b = fresh_dir("batch_b");
    const auto ra = invoke({"batch", scenarios().string(), "--out", a.string()});
    const auto rb = invoke({"batch", scenarios().string(), "--out", b.string(), "--format", "json"});
    CHECK(ra.code == 0);
    CHECK(rb.code == 0);
    const auto scns = files_with(scenarios(), ".scn");
    CHECK(count_lines(ra.out) == scns.size());
    for (const auto& f : scns) {
        const auto json = b / (f.stem().string() + ".json");
        CHECK(fs::exists(json));
        if (fs::exists(a / json.filename())) CHECK(slurp(json) == slurp(a / json.filename()));
    }
    CHECK(fs::exists(a / "verify_brun.csv"));

    const auto bad = invoke({"batch", broken().string(), "--out", fresh_dir("batch_bad").string()});
    CHECK(bad.code == 2);
    CHECK(count_lines(bad.err) == files_with(broken(), ".scn").size());
    CHECK(invoke({"batch", (broken() / "none").string()}).code == 5);
}
