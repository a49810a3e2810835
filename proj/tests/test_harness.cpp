#include <doctest.h>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/harness.hpp"

#include <filesystem>
#include <fstream>

using namespace cocy;
using namespace cocy::harness;

namespace {

ExperimentConfig cfg_of(const std::string& text) { return ExperimentConfig::parse(text, "test"); }

const char* kSpectrumId = R"(
[base]
kind = golden
[cocycle]
family = sl
dim = 2
rule = identity
[operation]
name = spectrum
seed = 3
n = 2000
)";

const char* kSplit = R"(
[base]
kind = doubling
[cocycle]
family = sl
dim = 2
rule = identity
[operation]
name = split
seed = 11
verify_n = 100000
tolerance = 0.02
)";

Json strip_clock(Json j) {
    j.erase("wall_clock_s");
    return j;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing diagnostics name the field") {
    CHECK_THROWS_WITH_AS(cfg_of("[bogus]\nx = 1\n"), doctest::Contains("unknown section"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg_of("x = 1\n"), doctest::Contains("outside of a section"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg_of("[base]\nkind = a\nkind = b\n"), doctest::Contains("duplicate key base.kind"), ConfigError);
    const auto c = cfg_of("[operation]\nn = 12x\nseed = -4\nk = 2.5\n");
    CHECK_THROWS_WITH_AS(c.integer("operation", "n", 1, 0, 100), doctest::Contains("operation.n"), ConfigError);
    CHECK_THROWS_WITH_AS(c.seed(), doctest::Contains("operation.seed"), ConfigError);
    CHECK_THROWS_WITH_AS(c.integer("operation", "k", 1, 0, 100), doctest::Contains("integer"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg_of("[operation]\nname = x\n").seed(), doctest::Contains("mandatory"), ConfigError);
}

TEST_CASE("unknown names and keys are config errors") {
    auto c = cfg_of(kSpectrumId);
    c.set("operation", "typo_key", "1");
    CHECK_THROWS_WITH_AS(run(c), doctest::Contains("operation.typo_key"), ConfigError);
    auto d = cfg_of(kSpectrumId);
    d.set("cocycle", "rule", "wobble");
    CHECK_THROWS_WITH_AS(run(d), doctest::Contains("cocycle.rule"), ConfigError);
    auto e = cfg_of(kSpectrumId);
    e.set("operation", "name", "nonsense");
    CHECK_THROWS_AS(run(e), ConfigError);
    auto f = cfg_of(kSpectrumId);
    f.set("base", "kind", "suspension");
    f.set("base", "section", "golden");
    CHECK_THROWS_WITH_AS(run(f), doctest::Contains("discrete base"), ConfigError);
    auto g = cfg_of(kSpectrumId);
    g.set("operation", "n", "5");
    CHECK_THROWS_WITH_AS(run(g), doctest::Contains("outside"), ConfigError);
}

TEST_CASE("spectrum of the identity is zero") {
    const ResultRecord r = run(cfg_of(kSpectrumId));
    CHECK(r.pass());
    CHECK(r.measured["lambda_1"]["value"].get<double>() == doctest::Approx(0.0));
    CHECK(r.measured["lambda_2"]["value"].get<double>() == doctest::Approx(0.0));
    CHECK(r.csv_header.front() == "n");
    CHECK(r.csv_header.size() == 5);
}

TEST_CASE("split config reproduces the shift and passes") {
    const ResultRecord r = run(cfg_of(kSplit));
    CHECK(r.pass());
    bool saw_shift = false;
    for (const auto& c : r.checks) saw_shift = saw_shift || c.invariant.rfind("exponent shift", 0) == 0;
    CHECK(saw_shift);
}

TEST_CASE("re-running with the same seed is byte-identical apart from the clock") {
    const std::string a = strip_clock(run(cfg_of(kSplit)).to_json()).dump();
    const std::string b = strip_clock(run(cfg_of(kSplit)).to_json()).dump();
    CHECK(a == b);
}

TEST_CASE("records validate against the shipped schema") {
    const Json schema = result_schema();
    const Json rec = run(cfg_of(kSpectrumId)).to_json();
    CHECK(validate(rec, schema).empty());
    Json broken = rec;
    broken.erase("seed");
    broken["pass"] = "yes";
    CHECK(validate(broken, schema).size() == 2);
    Json bad_op = rec;
    bad_op["operation"] = "dance";
    CHECK(validate(bad_op, schema).size() == 1);
}

TEST_CASE("module errors are recorded, not swallowed") {
    auto c = cfg_of(kSplit);
    c.set("cocycle", "rule", "diag 2 0.5");
    const ResultRecord r = run(c);
    REQUIRE(r.error);
    CHECK(r.error->first == "NotOnePoint");
    CHECK_FALSE(r.pass());
    CHECK(validate(r.to_json(), result_schema()).empty());
}

TEST_CASE("a failing invariant fails the record") {
    auto c = cfg_of(kSplit);
    c.set("operation", "M", "0.001");  // impossible distance budget
    c.set("operation", "verify_n", "0");
    const ResultRecord r = run(c);
    CHECK_FALSE(r.pass());
}

TEST_CASE("suite: empty list succeeds, failures are named") {
    const SuiteSummary empty = suite({}, std::nullopt);
    CHECK(empty.rows.empty());
    CHECK(empty.pass());

    const auto dir = std::filesystem::temp_directory_path() / "cocyclelab_suite_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "good.cfg") << kSpectrumId;
    std::string bad = kSplit;
    bad += "M = 0.001\n";
    std::ofstream(dir / "bad.cfg") << bad;
    std::ofstream(dir / "broken.cfg") << "[operation]\nname = spectrum\n";
    const SuiteSummary s = suite({(dir / "good.cfg").string(), (dir / "bad.cfg").string(), (dir / "broken.cfg").string()}, 5);
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].pass);
    CHECK_FALSE(s.rows[1].pass);
    CHECK(s.rows[1].note.find("distance budget") != std::string::npos);
    CHECK(s.rows[2].config_error);
    CHECK_FALSE(s.pass());
    CHECK(s.table().find("FAIL") != std::string::npos);
}

TEST_CASE("records are written atomically as JSON and CSV") {
    const auto dir = std::filesystem::temp_directory_path() / "cocyclelab_out_test";
    std::filesystem::remove_all(dir);
    write_record(run(cfg_of(kSpectrumId)), dir.string(), "rec", "csv");
    CHECK(std::filesystem::exists(dir / "rec.json"));
    CHECK(std::filesystem::exists(dir / "rec.csv"));
    CHECK_FALSE(std::filesystem::exists(dir / "rec.json.tmp"));
    std::ifstream f(dir / "rec.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "n,lambda_1,lambda_2,stderr_1,stderr_2");
}

TEST_CASE("acceptance registry lists the eleven criteria") {
    CHECK(acceptance_criteria().size() == 11);
    CHECK(acceptance_criteria().front().id == 1);
}

}
