#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "buildinglab/building.hpp"
#include "buildinglab/harness.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace bl;
using namespace bl::harness;
namespace fs = std::filesystem;

namespace {

SuiteSpec spec_of(std::string name) {
    SuiteSpec s;
    s.name = std::move(name);
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "buildinglab-harness-test";
    fs::create_directories(dir);
    return dir / name;
}

int lines_of(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

// A witness whose item fails: u and k do not commute.
Json failing_jordan_witness() {
    auto b = bld::Building::build(3, 3);
    const bld::Frame fr{b->find({{1, 0, 0}}), b->find({{0, 1, 0}}), b->find({{0, 0, 1}})};
    return Json{{"suite", "jordan-split"},
                {"payload",
                 {{"key", "j-manual"},
                  {"n", 3},
                  {"q", 3},
                  {"frame", fr},
                  {"u", {{1, 0, 1}, {0, 1, 0}, {0, 0, 1}}},
                  {"k", {{1, 0, 0}, {0, 1, 0}, {0, 0, 2}}}}}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BUILDINGLAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("registry") {
    const std::set<std::string> expect{"lambda-an",     "lambda-dn",          "lambda-bn",
                                       "lambda-min-calculus", "nicely-convex", "induction-lemma",
                                       "dn-example",    "gallery-coords",     "pihalf-ball",
                                       "dichotomy",     "incenter-independence", "commuting-unipotent",
                                       "jordan-split",  "gn-recursion",       "vertex-poscodim"};
    const auto& names = suite_names();
    CHECK(names.size() == 15);
    CHECK(std::set<std::string>(names.begin(), names.end()) == expect);
    for (const auto& n : names) CHECK(!suite_description(n).empty());
    CHECK_THROWS_AS(run_suite(spec_of("lambda-xx")), DomainError);
    CHECK_THROWS_AS(replay(Json{{"suite", "nope"}, {"payload", {{"key", "x"}}}}), DomainError);
    CHECK_THROWS_AS(replay(Json{{"payload", {}}}), DomainError);
    CHECK_THROWS_AS(parse_format("xml"), DomainError);
    CHECK(parse_format("csv") == Format::csv);
}

TEST_CASE("lambda-an for A_3") {
    auto s = spec_of("lambda-an");
    s.rank = 3;
    const auto r = run_suite(s);
    // (vertex, root) incidences with positive inner product: sum over k of
    // C(4,k) k (4-k) = 4 * 3 * 2^2.
    CHECK(r.items.size() == 48);
    CHECK(r.ok());
    CHECK(r.summary().max_residual == 0.0);
    std::set<std::string> keys;
    for (const auto& it : r.items) keys.insert(it.key);
    CHECK(keys.size() == r.items.size());
    CHECK(std::is_sorted(r.items.begin(), r.items.end(), [](const Item& a, const Item& b) { return a.key < b.key; }));
}

TEST_CASE("dn-example is a single item carrying its values") {
    const auto r = run_suite(spec_of("dn-example"));
    REQUIRE(r.items.size() == 1);
    CHECK(r.items[0].pass);
    REQUIRE(r.items[0].witness);
    CHECK(r.items[0].witness->at("detail").at("f_K1") == "-1");
    // Replaying a passing witness reproduces it.
    const auto again = replay(*r.items[0].witness);
    CHECK(again.pass);
    CHECK(again.witness->dump() == r.items[0].witness->dump());
}

TEST_CASE("dichotomy report and csv export") {
    auto s = spec_of("dichotomy");
    s.n = 3;
    s.q = 2;
    const auto r = run_suite(s);
    CHECK(r.items.size() == 168);
    CHECK(r.ok());
    const auto csv = render(r, Format::csv);
    CHECK(lines_of(csv) == 169);
    CHECK(csv.rfind("key,verdict,residual,witness\n", 0) == 0);
    const auto p = scratch("dichotomy.csv");
    export_report(r, p.string(), Format::csv);
    CHECK(slurp(p) == csv);
    const auto first = slurp(p);
    export_report(r, p.string(), Format::csv);
    CHECK(slurp(p) == first);
}

TEST_CASE("reports are independent of workers and repeatable") {
    for (const char* name : {"vertex-poscodim", "nicely-convex", "jordan-split", "gallery-coords"}) {
        auto s = spec_of(name);
        s.samples = 6;
        s.seed = 17;
        const auto a = run_suite(s);
        s.workers = 3;
        const auto b = run_suite(s);
        CHECK(render(a, Format::json, false) == render(b, Format::json, false));
        CHECK(render(a, Format::csv) == render(b, Format::csv));
        CHECK(to_json(a, false).contains("wall_time") == false);
        CHECK(to_json(a).contains("wall_time"));
    }
}

TEST_CASE("seeds change instances but not keys") {
    auto s = spec_of("vertex-poscodim");
    s.samples = 8;
    s.seed = 1;
    const auto a = run_suite(s);
    s.seed = 2;
    const auto b = run_suite(s);
    REQUIRE(a.items.size() == b.items.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        CHECK(a.items[i].key == b.items[i].key);
        differs |= a.items[i].witness->dump() != b.items[i].witness->dump();
    }
    CHECK(differs);
    CHECK(to_json(a).at("seed") == 1);
}

TEST_CASE("vertex-poscodim logs every instance for replay") {
    auto s = spec_of("vertex-poscodim");
    s.samples = 10;
    const auto r = run_suite(s);
    CHECK(r.items.size() == 10);
    for (const auto& it : r.items) {
        REQUIRE(it.witness);
        CHECK(it.witness->at("payload").contains("instance"));
        CHECK(it.witness->at("detail").at("hypotheses") == true);
        const auto again = replay(*it.witness);
        CHECK(again.pass == it.pass);
        CHECK(again.witness->at("detail") == it.witness->at("detail"));
    }
}

TEST_CASE("failing witnesses replay to the same failure") {
    const auto w = failing_jordan_witness();
    const auto first = replay(w);
    CHECK_FALSE(first.pass);
    REQUIRE(first.witness);
    CHECK(first.witness->at("detail").at("error") == "u and k must commute");
    const auto second = replay(*first.witness);
    CHECK_FALSE(second.pass);
    CHECK(second.witness->dump() == first.witness->dump());

    // Through a report: only items with witnesses are replayed.
    Report rep;
    rep.suite = "jordan-split";
    rep.params = Json::object();
    rep.version = version();
    rep.items.push_back(first);
    rep.items.push_back(Item{"j-ok", true, 0, std::nullopt});
    const auto back = replay_report(to_json(rep));
    REQUIRE(back.size() == 1);
    CHECK_FALSE(back[0].pass);
}

TEST_CASE("report round trip and empty report") {
    auto s = spec_of("gn-recursion");
    s.n = 5;
    s.samples = 100;
    const auto r = run_suite(s);
    const auto back = report_from_json(Json::parse(render(r, Format::json)));
    CHECK(render(back, Format::json) == render(r, Format::json));
    CHECK_THROWS_AS(report_from_json(Json{{"suite", "x"}}), DomainError);

    Report empty;
    empty.suite = "dn-example";
    empty.params = Json::object();
    empty.version = version();
    const auto p = scratch("empty.json");
    export_report(empty, p.string(), Format::json);
    const auto j = Json::parse(slurp(p));
    CHECK(j.at("items").empty());
    CHECK(j.at("summary").at("pass") == 0);
    CHECK(j.at("summary").at("fail") == 0);
    CHECK(lines_of(render(empty, Format::csv)) == 1);
    CHECK_THROWS_AS(export_report(empty, "/nonexistent-dir/x/report.json", Format::json), Error);
}

TEST_CASE("schema fields") {
    const auto j = to_json(run_suite(spec_of("dn-example")));
    std::vector<std::string> keys;
    for (auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"suite", "params", "seed", "items", "summary", "version", "schema",
                                           "wall_time"});
    const auto& item = j.at("items").at(0);
    CHECK(item.at("verdict") == "pass");
    CHECK(item.contains("residual"));
    CHECK(j.at("summary").contains("max_residual"));
}

TEST_CASE("gn-recursion residuals follow the bound") {
    auto s = spec_of("gn-recursion");
    const auto r = run_suite(s);
    REQUIRE(r.items.size() == 20);
    CHECK(r.ok());
    CHECK(r.items.back().key == "g20");
    CHECK(r.items.back().residual < 1e-5);
    // Consistent with 2^n (1 - cos(t / 2^n)) at t = pi/2.
    CHECK(r.items.back().residual <= std::ldexp(1.0, 20) * (1 - std::cos(M_PI / 2 / std::ldexp(1.0, 20))) + 1e-15);
    for (std::size_t i = 1; i < r.items.size(); ++i) CHECK(r.items[i].residual < r.items[i - 1].residual);
}

TEST_CASE("guards") {
    auto s = spec_of("lambda-an");
    s.guards.max_items = 10;
    CHECK_THROWS_AS(run_suite(s), GuardError);
    auto d = spec_of("dichotomy");
    d.guards.max_group = 100;
    CHECK_THROWS_AS(run_suite(d), GuardError);
    auto g = spec_of("gallery-coords");
    g.n = 6;
    g.guards.max_group = 1000;
    CHECK_THROWS_AS(run_suite(g), GuardError);
    auto bad = spec_of("dichotomy");
    bad.q = 4;
    CHECK_THROWS_AS(run_suite(bad), DomainError);
    auto w = spec_of("dn-example");
    w.workers = 0;
    CHECK_THROWS_AS(run_suite(w), DomainError);
}

TEST_CASE("cache directory") {
    const auto dir = scratch("cache");
    fs::remove_all(dir);
    auto s = spec_of("pihalf-ball");
    s.n = 3;
    s.cache_dir = dir.string();
    const auto a = run_suite(s);
    CHECK(a.ok());
    CHECK(!fs::is_empty(dir));
    const auto b = run_suite(s);  // from cache
    CHECK(render(a, Format::json, false) == render(b, Format::json, false));
    for (const auto& e : fs::directory_iterator(dir)) std::ofstream(e.path()) << "garbage\n";
    CHECK_THROWS_AS(run_suite(s), CacheError);
    fs::remove_all(dir);

    ::setenv(kCacheEnv, "/tmp/from-env", 1);
    CHECK(resolve_cache_dir("") == "/tmp/from-env");
    CHECK(resolve_cache_dir("/tmp/cli") == "/tmp/cli");
    ::unsetenv(kCacheEnv);
    CHECK(resolve_cache_dir("").empty());
}

TEST_CASE("cli exit codes") {
    CHECK(run_cli("list") == 0);
    CHECK(run_cli("verify --suite dn-example") == 0);
    CHECK(run_cli("verify --suite no-such-suite") == 2);
    CHECK(run_cli("verify --suite dn-example --format xml") == 2);
    CHECK(run_cli("verify") == 2);
    CHECK(run_cli("verify --suite dichotomy --q 4") == 2);
    CHECK(run_cli("verify --suite lambda-an --max-items 5") == 2);

    const auto w = scratch("failing-witness.json");
    std::ofstream(w) << failing_jordan_witness().dump();
    CHECK(run_cli("replay " + w.string()) == 1);

    const auto rep = scratch("poscodim.json");
    CHECK(run_cli("verify --suite vertex-poscodim --samples 4 --report " + rep.string()) == 0);
    CHECK(run_cli("replay " + rep.string()) == 0);
    CHECK(run_cli("dump-fix --n 3 --q 2 --matrix \"1 1 0; 0 1 0; 0 0 1\" --out " + scratch("fix.json").string()) == 0);
    const auto dumped = Json::parse(slurp(scratch("fix.json")));
    // Fixed lines: the 3 in the plane e2 = 0; fixed planes: the 3 through e1;
    // fixed chambers: 3 through the line e1 plus 2 in that plane.
    CHECK(dumped.at("faces").size() == 11);
    CHECK(run_cli("dump-fix --n 3 --q 2 --matrix \"1 1; 0 1\"") == 2);
}
