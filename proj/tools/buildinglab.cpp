#include "buildinglab/building.hpp"
#include "buildinglab/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace h = bl::harness;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// "1 1 0; 0 1 0; 0 0 1" -> rows.
bl::bld::Mat parse_matrix(const std::string& text) {
    bl::bld::Mat m;
    std::stringstream rows(text);
    std::string row;
    while (std::getline(rows, row, ';')) {
        std::stringstream cells(row);
        bl::bld::Row r;
        int x;
        while (cells >> x) r.push_back(x);
        if (!cells.eof()) throw bl::DomainError("bad matrix entry in '" + row + "'");
        if (!r.empty()) m.push_back(r);
    }
    if (m.empty()) throw bl::DomainError("empty matrix");
    for (const auto& r : m)
        if (r.size() != m.size()) throw bl::DomainError("matrix must be square");
    return m;
}

h::Json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw bl::Error("cannot open '" + path + "'");
    try {
        return h::Json::parse(f);
    } catch (const h::Json::exception& e) {
        throw bl::DomainError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void print_item(const h::Item& it) {
    std::cout << (it.pass ? "pass " : "FAIL ") << it.key << "  residual=" << it.residual;
    if (!it.pass && it.witness && it.witness->contains("detail")) std::cout << "  " << it.witness->at("detail").dump();
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification suites for incenters of fixed point sets in spherical buildings"};
    app.set_version_flag("--version", h::version());
    app.require_subcommand(1);

    h::SuiteSpec spec;
    std::optional<std::string> family;
    std::optional<int> rank, n, q, samples;
    std::string report_path, format = "json", cache_dir;
    bool quiet = false;
    auto* verify = app.add_subcommand("verify", "run a named suite");
    verify->add_option("--suite", spec.name, "suite name (see `list`)")->required();
    verify->add_option("--family", family, "root system family for Coxeter suites (A, B, C, D, BC)");
    verify->add_option("--rank", rank, "rank for Coxeter suites");
    verify->add_option("--n", n, "dimension of F_q^n for building suites; m for gn-recursion");
    verify->add_option("--q", q, "field size (2, 3, 5, 7)");
    verify->add_option("--seed", spec.seed, "seed for sampled items")->capture_default_str();
    verify->add_option("--samples", samples, "sample count (meaning depends on the suite)");
    verify->add_option("--report", report_path, "write the report to this path");
    verify->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    verify->add_option("--workers", spec.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    verify->add_option("--cache-dir", cache_dir, "flag/frame cache directory (default $" + std::string(h::kCacheEnv) + ")");
    verify->add_option("--max-items", spec.guards.max_items, "guard on the number of items")->capture_default_str();
    verify->add_flag("--quiet", quiet, "print only the summary");

    std::string witness_path;
    auto* replay = app.add_subcommand("replay", "re-run failing items from a witness or report file");
    replay->add_option("file", witness_path, "witness JSON or report JSON")->required();
    replay->add_option("--cache-dir", cache_dir, "flag/frame cache directory");

    auto* list = app.add_subcommand("list", "list the registered suites");

    int dn = 3, dq = 2;
    std::string matrix, out_path;
    auto* dump = app.add_subcommand("dump-fix", "dump the fixed point set of a matrix as JSON");
    dump->add_option("--n", dn, "dimension")->capture_default_str();
    dump->add_option("--q", dq, "field size")->capture_default_str();
    dump->add_option("--matrix", matrix, "rows separated by ';', e.g. \"1 1 0; 0 1 0; 0 0 1\"")->required();
    dump->add_option("--out", out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*list) {
            for (const auto& name : h::suite_names()) std::cout << name << "  " << h::suite_description(name) << "\n";
            return kExitPass;
        }
        if (*dump) {
            const auto g = parse_matrix(matrix);
            if (static_cast<int>(g.size()) != dn) throw bl::DomainError("matrix size does not match --n");
            auto b = bl::bld::Building::build(dn, dq);
            const auto text = bl::bld::dump_fixed_set(bl::bld::fixed_faces(b, g), g);
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream f(out_path, std::ios::binary);
                if (!(f << text)) throw bl::Error("cannot write '" + out_path + "'");
            }
            return kExitPass;
        }
        if (*replay) {
            const auto j = read_json(witness_path);
            const auto dir = h::resolve_cache_dir(cache_dir);
            std::vector<h::Item> items;
            if (j.contains("items")) items = h::replay_report(j, dir);
            else items.push_back(h::replay(j, dir));
            bool ok = true;
            for (const auto& it : items) {
                print_item(it);
                ok = ok && it.pass;
            }
            std::cout << items.size() << " replayed, " << (ok ? "all pass" : "failures reproduced") << "\n";
            return ok ? kExitPass : kExitFail;
        }

        spec.family = family;
        spec.rank = rank;
        spec.n = n;
        spec.q = q;
        spec.samples = samples;
        spec.cache_dir = h::resolve_cache_dir(cache_dir);
        const auto rep = h::run_suite(spec);
        if (!report_path.empty()) h::export_report(rep, report_path, h::parse_format(format));
        for (const auto& it : rep.items)
            if (!quiet || !it.pass) print_item(it);
        const auto s = rep.summary();
        std::cout << rep.suite << ": " << s.pass << " pass, " << s.fail << " fail, max residual " << s.max_residual
                  << ", " << rep.wall_time << " s\n";
        return s.fail == 0 ? kExitPass : kExitFail;
    } catch (const bl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
