#pragma once

#include "buildinglab/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Named verification suites, reports and replay.
//
// A suite expands its resolved parameters into a list of item payloads. Each
// payload is a self-contained JSON object (including any per-item seed), so
// an item can be re-run from its payload alone; failing items carry it as the
// witness. Reports are ordered by item key and do not depend on the number of
// workers.
namespace bl::harness {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCacheEnv = "BUILDINGLAB_CACHE_DIR";
inline constexpr int kSchemaVersion = 1;

struct Guards {
    std::size_t max_items = 200'000;   // items in one suite run
    std::size_t max_group = 100'000;   // group elements enumerated by a sweep
};

struct SuiteSpec {
    std::string name;
    std::optional<std::string> family;
    std::optional<int> rank, n, q, samples;
    std::uint64_t seed = 1;
    Guards guards;
    int workers = 1;
    std::string cache_dir;  // empty disables disk caches
};

struct Item {
    std::string key;
    bool pass = true;
    double residual = 0;
    std::optional<Json> witness;  // {suite, payload, detail}
};

struct Summary {
    int pass = 0, fail = 0;
    double max_residual = 0;
};

struct Report {
    std::string suite;
    Json params;  // resolved parameters
    std::uint64_t seed = 0;
    std::vector<Item> items;
    double wall_time = 0;
    std::string version;

    Summary summary() const;
    bool ok() const { return summary().fail == 0; }
};

const std::vector<std::string>& suite_names();
std::string suite_description(const std::string& name);

// Throws DomainError for an unknown suite or bad parameters, GuardError when
// the run would exceed its guards, CacheError for a corrupt cache.
Report run_suite(const SuiteSpec& spec);

// Re-runs one item from a witness object ({suite, payload, ...}).
Item replay(const Json& witness, const std::string& cache_dir = "");
// Re-runs every item of a parsed report that carries a witness.
std::vector<Item> replay_report(const Json& report, const std::string& cache_dir = "");

enum class Format { json, csv };
Format parse_format(const std::string& s);

Json to_json(const Report& r, bool include_wall_time = true);
Report report_from_json(const Json& j);
// JSON is printed with two-space indentation and a trailing newline; CSV has
// the header key,verdict,residual,witness and one row per item.
std::string render(const Report& r, Format format, bool include_wall_time = true);
void export_report(const Report& r, const std::string& path, Format format);

// CLI value if non-empty, else $BUILDINGLAB_CACHE_DIR, else empty.
std::string resolve_cache_dir(const std::string& cli_value);

std::string version();

}  // namespace bl::harness
