// Acceptance run: one line per criterion, nonzero exit status if any fails.
// Reports for every suite are written to ./acceptance-reports/.

#include "buildinglab/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

using namespace bl;
using namespace bl::harness;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream msg;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            msg << " [violated: " << what << "]";
        }
    }
};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

Report run(SuiteSpec s) {
    s.workers = workers();
    auto r = run_suite(s);
    std::filesystem::create_directories("acceptance-reports");
    export_report(r, "acceptance-reports/" + s.name + ".json", Format::json);
    return r;
}

SuiteSpec spec(const std::string& name) {
    SuiteSpec s;
    s.name = name;
    return s;
}

const Json& detail(const Item& it) {
    static const Json none = Json::object();
    return it.witness ? it.witness->at("detail") : none;
}

void common(Check& c, const Report& r) {
    const auto s = r.summary();
    c.require(!r.items.empty(), "nonempty");
    c.require(s.fail == 0, std::to_string(s.fail) + " failing items");
    c.msg << r.items.size() << " items, " << s.fail << " fail, max residual " << s.max_residual << ", "
          << r.wall_time << " s";
}

// Brute-force count of commuting unordered pairs in the unitriangular group
// of F_2^4 (64 elements stored as 6 bits above the diagonal).
int commuting_pairs_f2_4() {
    using M = std::array<std::array<int, 4>, 4>;
    std::vector<M> g;
    const int pos[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (int bits = 0; bits < 64; ++bits) {
        M m{};
        for (int i = 0; i < 4; ++i) m[i][i] = 1;
        for (int k = 0; k < 6; ++k) m[pos[k][0]][pos[k][1]] = (bits >> k) & 1;
        g.push_back(m);
    }
    auto mul = [](const M& a, const M& b) {
        M c{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                int s = 0;
                for (int k = 0; k < 4; ++k) s += a[i][k] * b[k][j];
                c[i][j] = s % 2;
            }
        return c;
    };
    int count = 0;
    for (int i = 0; i < 64; ++i)
        for (int j = i; j < 64; ++j) count += mul(g[i], g[j]) == mul(g[j], g[i]);
    return count;
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        std::function<void(Check&)> body;
    };
    const std::vector<Criterion> criteria = {
        {"C1", "lambda-an", [](Check& c) {
             const auto r = run(spec("lambda-an"));
             common(c, r);
             // sum over n = 2..6 of (n+1) n 2^(n-1) incidences
             long expect = 0;
             for (int n = 2; n <= 6; ++n) expect += (n + 1L) * n * (1L << (n - 1));
             c.require(static_cast<long>(r.items.size()) == expect, "incidence count " + std::to_string(expect));
             c.require(r.summary().max_residual == 0.0, "exact equality");
             c.require(r.wall_time < 60, "runtime < 60 s");
         }},
        {"C2", "lambda-dn / lambda-bn", [](Check& c) {
             const auto d = run(spec("lambda-dn"));
             const auto b = run(spec("lambda-bn"));
             common(c, d);
             c.msg << "; ";
             common(c, b);
             long adjacencies = 0, incidences = 0;
             for (const auto* r : {&d, &b})
                 for (const auto& it : r->items) {
                     incidences += detail(it).value("incidences", 0);
                     adjacencies += detail(it).value("adjacencies", 0);
                 }
             c.msg << "; " << incidences << " incidences, " << adjacencies << " adjacency cases";
             c.require(d.params.at("ranks") == Json({4, 5}) && b.params.at("ranks") == Json({3, 4}), "D4, D5, B3, B4");
             c.require(adjacencies > 0 && incidences > 0, "non-vacuous");
             c.require(d.wall_time + b.wall_time < 120, "runtime < 2 min");
         }},
        {"C3", "dn-example", [](Check& c) {
             const auto r = run(spec("dn-example"));
             common(c, r);
             const auto& dt = detail(r.items.at(0));
             c.msg << "; f_K1 = " << dt.at("f_K1").get<std::string>() << ", f_K2 = " << dt.at("f_K2").get<std::string>();
             c.require(r.items.size() == 1 && dt.at("f_K1") == "-1", "f_K1(x) = -1");
         }},
        {"C4", "lambda-min-calculus", [](Check& c) {
             const auto r = run(spec("lambda-min-calculus"));
             common(c, r);
             c.require(r.items.size() >= 200, ">= 200 subcomplexes");
             c.require(r.params.at("points") == 1000, "10^3 points each");
             c.require(r.summary().max_residual <= 1e-12, "|delta| <= 1e-12");
         }},
        {"C5", "nicely-convex", [](Check& c) {
             const auto r = run(spec("nicely-convex"));
             common(c, r);
             c.require(r.params.at("pairs") == 10000, "10^4 pairs per subcomplex");
         }},
        {"C6", "induction-lemma", [](Check& c) {
             const auto r = run(spec("induction-lemma"));
             common(c, r);
             long triples = 0;
             for (const auto& it : r.items) triples += detail(it).value("triples", 0);
             c.msg << "; " << triples << " triples";
             c.require(triples >= 1000, ">= 10^3 triples");
             c.require(r.summary().max_residual <= 1e-9, "residual <= 1e-9");
         }},
        {"C7", "gn-recursion", [](Check& c) {
             const auto r = run(spec("gn-recursion"));
             common(c, r);
             const auto& g20 = r.items.back();
             c.msg << "; sup |g20 - cos| = " << g20.residual;
             c.require(g20.key == "g20" && r.params.at("grid") == 10000, "g20 on a 10^4 grid");
             c.require(g20.residual < 1e-5, "sup < 1e-5");
             const double bound = std::ldexp(1.0, 20) * (1 - std::cos(M_PI / 2 / std::ldexp(1.0, 20)));
             c.require(g20.residual <= bound + 1e-15, "within 2^n (1 - cos(t/2^n))");
         }},
        {"C8", "gallery-coords", [](Check& c) {
             const auto r = run(spec("gallery-coords"));
             common(c, r);
             bool all16 = true;
             for (const auto& it : r.items) all16 = all16 && detail(it).value("words", 0) == 16;
             c.require(r.items.size() == 64, "64 elements");
             c.require(all16, "16 reduced words each");
             c.require(r.wall_time < 120, "runtime < 2 min");
         }},
        {"C9", "pihalf-ball", [](Check& c) {
             const auto r = run(spec("pihalf-ball"));
             common(c, r);
             int n3 = 0, n4 = 0;
             for (const auto& it : r.items) (it.key.rfind("n3/", 0) == 0 ? n3 : n4)++;
             c.msg << "; " << n3 << " transvections of GL(3,2), " << n4 << " samples in GL(4,2)";
             c.require(n3 == 21 && n4 == 10, "21 + 10 items");
         }},
        {"C10", "dichotomy", [](Check& c) {
             const auto r = run(spec("dichotomy"));
             common(c, r);
             int sb = 0, ok = 0;
             for (const auto& it : r.items) {
                 const auto st = detail(it).value("status", std::string());
                 sb += st == "subbuilding";
                 ok += st == "ok" && it.pass;
             }
             c.msg << "; " << sb << " subbuilding, " << ok << " incenter";
             c.require(r.items.size() == 168 && sb + ok == 168, "all 168 classified");
             c.require(r.wall_time < 300, "runtime < 5 min");
         }},
        {"C11", "incenter-independence", [](Check& c) {
             const auto r = run(spec("incenter-independence"));
             common(c, r);
             int n3 = 0, n4 = 0, certified = 0;
             for (const auto& it : r.items) {
                 (it.key.rfind("n3/", 0) == 0 ? n3 : n4)++;
                 certified += detail(it).value("status", std::string()) == "ok";
             }
             c.msg << "; " << n3 << " unipotents of GL(3,2), " << n4 << " sampled in GL(4,2), " << certified
                   << " with incenters";
             c.require(n3 == 64 && n4 >= 10, "all GL(3,2) unipotents and GL(4,2) samples");
             c.require(r.summary().max_residual <= 1e-9, "agreement within 1e-9");
         }},
        {"C12", "commuting-unipotent", [](Check& c) {
             const auto r = run(spec("commuting-unipotent"));
             common(c, r);
             const int expect = commuting_pairs_f2_4();
             c.require(static_cast<int>(r.items.size()) == expect, "all " + std::to_string(expect) + " commuting pairs");
         }},
        {"C13", "jordan-split", [](Check& c) {
             const auto r = run(spec("jordan-split"));
             common(c, r);
             c.require(r.items.size() == 20 && r.params.at("q") == 3 && r.params.at("n") == 3, "20 pairs over F_3, n = 3");
         }},
        {"C14", "vertex-poscodim", [](Check& c) {
             const auto r = run(spec("vertex-poscodim"));
             common(c, r);
             int logged = 0;
             for (const auto& it : r.items)
                 logged += it.witness && it.witness->at("payload").contains("instance") &&
                           detail(it).value("hypotheses", false);
             c.msg << "; " << logged << " configurations logged to acceptance-reports/vertex-poscodim.json";
             c.require(logged >= 100 && logged == static_cast<int>(r.items.size()), ">= 100 logged instances");
         }},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        Check c;
        try {
            cr.body(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.msg << " error: " << e.what();
        }
        failed += !c.ok;
        std::cout << (c.ok ? "[PASS] " : "[FAIL] ") << cr.id << " " << cr.name << ": " << c.msg.str() << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria pass" << std::endl;
    return failed == 0 ? 0 : 1;
}
