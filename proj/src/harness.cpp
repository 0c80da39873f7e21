#include "buildinglab/harness.hpp"

#include "buildinglab/building.hpp"
#include "buildinglab/coxgeom.hpp"
#include "buildinglab/incenter.hpp"
#include "buildinglab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef BUILDINGLAB_VERSION
#define BUILDINGLAB_VERSION "0.0.0"
#endif

namespace bl::harness {

using rootsys::Family;
using bld::Mat;

namespace {

struct Ctx {
    std::string cache_dir;
    Guards guards;
};

struct Outcome {
    bool pass = true;
    double residual = 0;
    Json detail = Json::object();
};

struct SuiteDef {
    std::string name;
    std::string description;
    bool always_witness = false;
    std::function<Json(const SuiteSpec&)> resolve;
    std::function<std::vector<Json>(const Json& params, std::uint64_t seed, const Ctx&)> plan;
    std::function<Outcome(Json& payload, const Ctx&)> run;
};

std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    r.next();
    return r.next();
}

std::string pad(long long v, int width = 4) {
    std::string s = std::to_string(v);
    if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
    return s;
}

std::string tag(Family f, int rank) { return rootsys::family_name(f) + std::to_string(rank); }

Family family_of(const Json& p) { return rootsys::parse_family(p.at("family").get<std::string>()); }

// Family/rank list: the explicit pair when given, otherwise the defaults.
Json family_list(const SuiteSpec& s, const std::vector<std::pair<Family, int>>& defaults) {
    Json out = Json::array();
    if (s.family) {
        const Family f = rootsys::parse_family(*s.family);
        int rank = s.rank.value_or(0);
        if (!s.rank) {
            for (const auto& [df, dr] : defaults)
                if (df == f) rank = dr;
            if (rank == 0) throw DomainError("suite " + s.name + " needs --rank for family " + *s.family);
        }
        out.push_back({{"family", rootsys::family_name(f)}, {"rank", rank}});
    } else {
        for (const auto& [f, r] : defaults) out.push_back({{"family", rootsys::family_name(f)}, {"rank", r}});
    }
    return out;
}

void check_group_size(long double size, const Ctx& ctx, const std::string& what) {
    if (size > static_cast<long double>(ctx.guards.max_group))
        throw GuardError(what + " has more than " + std::to_string(ctx.guards.max_group) + " elements");
}

int check_q(int q) {
    if (q != 2 && q != 3 && q != 5 && q != 7) throw DomainError("q must be one of 2, 3, 5, 7");
    return q;
}

std::vector<int> standard_lines(const bld::Building& b) {
    std::vector<int> lines;
    for (int i = 0; i < b.n(); ++i) {
        bld::Row e(b.n(), 0);
        e[i] = 1;
        lines.push_back(b.find({e}));
    }
    return lines;
}

const std::vector<bld::Frame>& frames_for(const bld::BuildingPtr& b, const Ctx& ctx) {
    if (!ctx.cache_dir.empty()) {
        // Validates (or writes) the cache; the in-memory list is shared.
        const auto cached = bld::enum_frames_cached(*b, ctx.cache_dir);
        if (cached != b->frames()) throw CacheError("frame cache disagrees with enumeration");
    }
    return b->frames();
}

Mat mat_of(const Json& j) { return j.get<Mat>(); }

// ------------------------------------------------------------- Coxeter suites

SuiteDef lambda_an() {
    SuiteDef d;
    d.name = "lambda-an";
    d.description = "A_n: every interior (vertex, root) incidence has the closed-form value";
    d.resolve = [](const SuiteSpec& s) {
        Json ranks = Json::array();
        if (s.rank) ranks.push_back(*s.rank);
        else
            for (int n = 2; n <= 6; ++n) ranks.push_back(n);
        return Json{{"family", "A"}, {"ranks", ranks}};
    };
    d.plan = [](const Json& p, std::uint64_t, const Ctx&) {
        std::vector<Json> out;
        for (int n : p.at("ranks")) {
            auto cx = cox::CoxeterComplex::build(Family::A, n);
            for (std::size_t v = 0; v < cx->vertices.size(); ++v)
                for (std::size_t r = 0; r < cx->rs.roots.size(); ++r)
                    if (dot(cx->vertices[v], cx->rs.roots[r]) > 0)
                        out.push_back({{"key", tag(Family::A, n) + "/v" + pad(v) + "/r" + pad(r, 3)},
                                       {"rank", n},
                                       {"vertex", v},
                                       {"root", r}});
        }
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("rank");
        auto cx = cox::CoxeterComplex::build(Family::A, n);
        const IVec& x = cx->vertices.at(p.at("vertex").get<std::size_t>());
        const IVec& a = cx->rs.roots.at(p.at("root").get<std::size_t>());
        const int k = static_cast<int>(std::count_if(x.begin(), x.end(), [](long long c) { return c > 0; }));
        const auto expect = ExactScalar::sqrt_of(Rational(n + 1, 2 * k * (n + 1 - k)));
        const auto got = cox::cos_dist(to_rational(x), to_rational(a));
        Outcome o;
        o.pass = got == expect;
        o.residual = std::abs(got.to_double() - expect.to_double());
        o.detail = {{"value", got.str()}, {"expected", expect.str()}, {"k", k}};
        return o;
    };
    return d;
}

SuiteDef lambda_bd(Family fam) {
    SuiteDef d;
    d.name = fam == Family::D ? "lambda-dn" : "lambda-bn";
    d.always_witness = true;
    d.description = fam == Family::D
                        ? "D_n: vertex values in {lambda_i, 2 lambda_i}, forced cases, adjacency refinement"
                        : "B_n: vertex values in {lambda_i, 2 lambda_i} and adjacency refinement";
    d.resolve = [fam](const SuiteSpec& s) {
        Json ranks = Json::array();
        if (s.rank) ranks.push_back(*s.rank);
        else if (fam == Family::D) ranks = {4, 5};
        else ranks = {3, 4};
        return Json{{"family", rootsys::family_name(fam)}, {"ranks", ranks}};
    };
    d.plan = [fam](const Json& p, std::uint64_t, const Ctx&) {
        std::vector<Json> out;
        for (int n : p.at("ranks")) {
            auto cx = cox::CoxeterComplex::build(fam, n);
            for (std::size_t v = 0; v < cx->vertices.size(); ++v)
                out.push_back({{"key", tag(fam, n) + "/v" + pad(v)},
                               {"family", rootsys::family_name(fam)},
                               {"rank", n},
                               {"vertex", v}});
        }
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const Family f = family_of(p);
        const int n = p.at("rank");
        const int v = p.at("vertex");
        auto cx = cox::CoxeterComplex::build(f, n);
        const auto w = cox::WeightAssignment::standard(cx->rs);
        auto val = [&](int u, int r) { return cox::incidence_value(*cx, w, to_rational(cx->vertices[u]), r); };
        auto lam = [&](int i) { return cox::lambda_table(f, n, i); };
        Outcome o;
        auto fail = [&](const std::string& what, const ExactScalar& got, const ExactScalar& want) {
            o.residual = std::max(o.residual, std::abs(got.to_double() - want.to_double()));
            if (o.pass) o.detail = {{"violation", what}, {"value", got.str()}, {"expected", want.str()}};
            o.pass = false;
        };
        const int i = cx->vertex_types[v];
        const auto li = lam(i);
        int incidences = 0, adjacencies = 0;
        for (int r : cx->hemisphere_roots) {
            if (dot(cx->vertices[v], cx->rs.roots[r]) <= 0) continue;
            ++incidences;
            const auto s = val(v, r);
            const std::string where = " at root " + std::to_string(r);
            if (!(s == li || s == li * Rational(2))) fail("value set" + where, s, li);
            if (f == Family::D && i == n && s != li) fail("type n forced" + where, s, li);
            if (f == Family::D && i <= 2 && s != lam(1) * Rational(2))
                fail("types 1,2 forced" + where, s, lam(1) * Rational(2));
        }
        // Adjacency refinement with v as the higher-type vertex v_j.
        const int j = i;
        if (!(f == Family::D && j < 3)) {
            std::set<int> lower;
            for (const auto& ch : cx->chambers)
                if (ch[j - 1] == v)
                    for (int a = 0; a < j - 1; ++a) lower.insert(ch[a]);
            for (int vi : lower) {
                const int ti = cx->vertex_types[vi];
                for (int r : cx->hemisphere_roots) {
                    if (dot(cx->vertices[vi], cx->rs.roots[r]) < 0 || dot(cx->vertices[v], cx->rs.roots[r]) < 0)
                        continue;
                    if (val(v, r) != lam(j) * Rational(2)) continue;
                    ++adjacencies;
                    const auto want = lam(ti) * Rational(2);
                    const auto got = val(vi, r);
                    if (got != want)
                        fail("adjacency with vertex " + std::to_string(vi) + " at root " + std::to_string(r), got,
                             want);
                }
            }
        }
        if (o.pass) o.detail = {{"type", i}, {"incidences", incidences}, {"adjacencies", adjacencies}};
        return o;
    };
    return d;
}

SuiteDef dn_example_suite() {
    SuiteDef d;
    d.name = "dn-example";
    d.description = "D_4 crossing segments: f_K1(x) = -1 and f_K1(x) < f_K2(x)";
    d.always_witness = true;
    d.resolve = [](const SuiteSpec&) { return Json{{"family", "D"}, {"rank", 4}}; };
    d.plan = [](const Json&, std::uint64_t, const Ctx&) {
        return std::vector<Json>{{{"key", "D4/example"}}};
    };
    d.run = [](Json&, const Ctx&) {
        const auto ex = cox::dn_example();
        Outcome o;
        const auto minus_one = ExactScalar::rational(-1);
        o.pass = ex.f1.value == minus_one && ex.f1.value < ex.f2.value;
        o.residual = std::abs(ex.f1.value.to_double() + 1.0);
        o.detail = {{"f_K1", ex.f1.value.str()}, {"f_K2", ex.f2.value.str()}};
        return o;
    };
    return d;
}

// Items spread round-robin over the family list; one seed per item.
std::vector<Json> sampled_items(const Json& p, std::uint64_t seed, const char* letter, Json extra) {
    std::vector<Json> out;
    const auto& fams = p.at("families");
    const int total = p.at("items");
    for (int i = 0; i < total; ++i) {
        const auto& fr = fams[i % fams.size()];
        const Family f = family_of(fr);
        Json item{{"key", tag(f, fr.at("rank")) + "/" + letter + pad(i)},
                  {"family", fr.at("family")},
                  {"rank", fr.at("rank")},
                  {"seed", item_seed(seed, i)}};
        for (auto& [k, v] : extra.items()) item[k] = v;
        out.push_back(std::move(item));
    }
    return out;
}

const std::vector<std::pair<Family, int>> kCalculusFamilies{{Family::A, 3}, {Family::B, 3}, {Family::D, 4}};

SuiteDef lambda_min_calculus() {
    SuiteDef d;
    d.name = "lambda-min-calculus";
    d.description = "f over Lambda_K equals f over Lambda_K^min; monotonicity for nested subcomplexes";
    d.resolve = [](const SuiteSpec& s) {
        return Json{{"families", family_list(s, kCalculusFamilies)},
                    {"items", s.samples.value_or(210)},
                    {"points", 1000}};
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx&) {
        return sampled_items(p, seed, "k", {{"points", p.at("points")}});
    };
    d.run = [](Json& p, const Ctx&) {
        auto cx = cox::CoxeterComplex::build(family_of(p), p.at("rank"));
        const auto w = cox::WeightAssignment::standard(cx->rs);
        Rng rng(p.at("seed").get<std::uint64_t>());
        std::vector<int> ch;
        const auto K1 = cox::random_chamber_subcomplex(cx, rng, 5, &ch);
        Outcome o;
        const int points = p.at("points");
        for (int i = 0; i < points; ++i) {
            const auto e = cox::f_K(K1, w, cox::random_point(K1, rng));
            o.residual = std::max(o.residual, std::abs(e.value - e.value_full));
        }
        bool exact_vertices = true;
        for (int v : K1.vertices()) {
            const auto e = cox::f_K_exact(K1, w, to_rational(cx->vertices[v]));
            exact_vertices = exact_vertices && e.value == e.value_full;
        }
        // K2: K1 cut further by roots containing the same chamber.
        IVec c(cx->ambient_dim(), 0);
        for (int v : ch)
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += cx->vertices[v][i];
        std::vector<IVec> h = K1.hemispheres();
        for (int r : cx->hemisphere_roots)
            if (dot(c, cx->rs.roots[r]) > 0 && rng.below(3) == 0) h.push_back(cx->rs.roots[r]);
        const auto K2 = cox::ConvexSubcomplex::from_roots(cx, h);
        int shared = 0;
        bool monotone = true;
        for (int v : K2.vertices()) {
            const QVec x = to_rational(cx->vertices[v]);
            ++shared;
            if (!(cox::f_K_exact(K1, w, x).value <= cox::f_K_exact(K2, w, x).value)) {
                monotone = false;
                o.detail["monotonicity_vertex"] = v;
            }
        }
        o.pass = o.residual <= 1e-12 && exact_vertices && monotone;
        o.detail["lambda_min"] = K1.lambda_min();
        o.detail["extra_roots"] = static_cast<int>(h.size() - K1.hemispheres().size());
        o.detail["shared_vertices"] = shared;
        o.detail["exact_vertices"] = exact_vertices;
        return o;
    };
    return d;
}

SuiteDef nicely_convex() {
    SuiteDef d;
    d.name = "nicely-convex";
    d.description = "f(x) + f(y) >= 2 cos(d/2) f(m) on seeded pairs of random subcomplexes";
    d.resolve = [](const SuiteSpec& s) {
        return Json{{"families", family_list(s, kCalculusFamilies)},
                    {"items", s.samples.value_or(30)},
                    {"pairs", 10000}};
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx&) {
        return sampled_items(p, seed, "k", {{"pairs", p.at("pairs")}});
    };
    d.run = [](Json& p, const Ctx&) {
        auto cx = cox::CoxeterComplex::build(family_of(p), p.at("rank"));
        const auto w = cox::WeightAssignment::standard(cx->rs);
        Rng rng(p.at("seed").get<std::uint64_t>());
        const auto K = cox::random_chamber_subcomplex(cx, rng, 5);
        const auto viol = inc::check_nicely_convex(K, w, p.at("pairs"), rng);
        Outcome o;
        o.pass = viol.empty();
        for (const auto& v : viol) o.residual = std::max(o.residual, v.rhs - v.lhs);
        o.detail = {{"lambda_min", K.lambda_min()}, {"violations", viol.size()}};
        if (!viol.empty())
            o.detail["first"] = {{"kind", viol[0].kind}, {"x", viol[0].x}, {"y", viol[0].y},
                                 {"lhs", viol[0].lhs}, {"rhs", viol[0].rhs}};
        return o;
    };
    return d;
}

SuiteDef induction_lemma() {
    SuiteDef d;
    d.name = "induction-lemma";
    d.description = "f_CH(K,s)(y) = sin d(y,s) f_Sigma_s K(direction of y) on seeded (K, s, y) triples";
    d.always_witness = true;
    d.resolve = [](const SuiteSpec& s) {
        const int triples = s.samples.value_or(1000);
        const int per = 25;
        return Json{{"families", family_list(s, kCalculusFamilies)},
                    {"items", (triples + per - 1) / per},
                    {"points", per}};
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx&) {
        return sampled_items(p, seed, "t", {{"points", p.at("points")}});
    };
    d.run = [](Json& p, const Ctx&) {
        auto cx = cox::CoxeterComplex::build(family_of(p), p.at("rank"));
        const auto w = cox::WeightAssignment::standard(cx->rs);
        Rng rng(p.at("seed").get<std::uint64_t>());
        Outcome o;
        for (int attempt = 0; attempt < 100; ++attempt) {
            const auto K = cox::random_chamber_subcomplex(cx, rng, 4);
            // s: a face of K lying in the wall of one of its minimal roots.
            const int a = K.lambda_min()[rng.below(K.lambda_min().size())];
            std::vector<int> wall;
            for (int v : K.vertices())
                if (dot(cx->vertices[v], cx->rs.roots[a]) == 0) wall.push_back(v);
            std::vector<int> face;
            for (const auto& ch : cx->chambers) {
                std::vector<int> common;
                for (int v : ch)
                    if (std::count(wall.begin(), wall.end(), v)) common.push_back(v);
                if (!common.empty() && rng.below(4) == 0) {
                    face = common;
                    break;
                }
            }
            if (face.empty()) continue;
            std::vector<IVec> s;
            for (int v : face) s.push_back(cx->vertices[v]);
            const auto CH = cox::ch_with_sphere(K, s);
            std::vector<int> gen = K.vertices();
            for (std::size_t v = 0; v < cx->vertices.size(); ++v)
                if (cox::in_span(s, cx->vertices[v])) gen.push_back(static_cast<int>(v));
            const bool hull_ok = CH.vertices() == cox::ConvexSubcomplex::hull_of_vertices(cx, gen).vertices();
            const auto L = cox::link_subcomplex(K, s);
            const int points = p.at("points");
            int done = 0;
            for (int tries = 0; done < points && tries < 100 * points; ++tries) {
                const Vec y = cox::random_point(K, rng);
                cox::LinkDirectionF dir;
                try {
                    dir = cox::link_direction(s, y);
                } catch (const DomainError&) {
                    continue;
                }
                const double lhs = cox::f_K(CH, w, y).value;
                const double rhs = dir.sin_dist * L.f(w, normalized(dir.direction));
                o.residual = std::max(o.residual, std::abs(lhs - rhs));
                ++done;
            }
            o.pass = hull_ok && done == points && o.residual <= 1e-9;
            o.detail = {{"lambda_min", K.lambda_min()}, {"face", face}, {"triples", done}, {"hull_agrees", hull_ok}};
            return o;
        }
        o.pass = false;
        o.residual = 1;
        o.detail = {{"error", "no boundary face found in 100 attempts"}};
        return o;
    };
    return d;
}

SuiteDef gn_recursion() {
    SuiteDef d;
    d.name = "gn-recursion";
    d.description = "|g_m(t) - cos t| <= 2^m (1 - cos(t/2^m)) on a grid of [0, pi/2]; residual is the sup error";
    d.resolve = [](const SuiteSpec& s) {
        const int n = s.n.value_or(20);
        if (n < 1 || n > 60) throw DomainError("gn-recursion needs 1 <= n <= 60");
        return Json{{"n", n}, {"grid", s.samples.value_or(10000)}};
    };
    d.plan = [](const Json& p, std::uint64_t, const Ctx&) {
        std::vector<Json> out;
        for (int m = 1; m <= p.at("n").get<int>(); ++m)
            out.push_back({{"key", "g" + pad(m, 2)}, {"m", m}, {"grid", p.at("grid")}});
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const int m = p.at("m");
        const int grid = p.at("grid");
        Outcome o;
        double worst_t = 0;
        for (int i = 0; i <= grid; ++i) {
            const double t = M_PI / 2 * i / grid;
            const double err = std::abs(inc::gn_recursion(m, t) - std::cos(t));
            if (err > o.residual) {
                o.residual = err;
                worst_t = t;
            }
            if (err > inc::gn_bound(m, t) + 1e-15 && o.pass) {
                o.pass = false;
                o.detail["bound_violated_at"] = t;
            }
        }
        o.detail["argmax"] = worst_t;
        o.detail["bound_at_pi_2"] = inc::gn_bound(m, M_PI / 2);
        return o;
    };
    return d;
}

SuiteDef vertex_poscodim() {
    SuiteDef d;
    d.name = "vertex-poscodim";
    d.description = "vertex restriction lemma in positive codimension on seeded B_3/D_4 configurations";
    d.always_witness = true;
    d.resolve = [](const SuiteSpec& s) {
        return Json{{"families", family_list(s, {{Family::B, 3}, {Family::D, 4}})},
                    {"items", s.samples.value_or(120)},
                    {"attempts", 500}};
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx&) {
        return sampled_items(p, seed, "c", {{"attempts", p.at("attempts")}});
    };
    d.run = [](Json& p, const Ctx&) {
        Outcome o;
        std::optional<cox::PoscodimInstance> inst;
        int attempts = 0;
        if (p.contains("instance")) {
            inst = cox::poscodim_from_json(p.at("instance").dump());
        } else {
            auto cx = cox::CoxeterComplex::build(family_of(p), p.at("rank"));
            Rng rng(p.at("seed").get<std::uint64_t>());
            const int limit = p.at("attempts");
            for (; attempts < limit; ++attempts) {
                auto cand = cox::sample_poscodim(cx, rng);
                if (cox::check_poscodim(cand).hypotheses) {
                    inst = cand;
                    ++attempts;
                    break;
                }
            }
        }
        if (!inst) {
            o.pass = false;
            o.residual = 1;
            o.detail = {{"error", "no configuration satisfying the hypotheses"}, {"attempts", attempts}};
            return o;
        }
        const auto v = cox::check_poscodim(*inst);
        o.pass = v.hypotheses && v.conclusion;
        o.residual = o.pass ? 0 : 1;
        o.detail = {{"hypotheses", v.hypotheses},
                    {"conclusion", v.conclusion},
                    {"f1", v.f1.str()},
                    {"f2", v.f2.str()},
                    {"maximizing", v.maximizing}};
        if (!v.reason.empty()) o.detail["reason"] = v.reason;
        if (attempts) p["attempts_used"] = attempts;
        p["instance"] = Json::parse(cox::poscodim_to_json(*inst));
        return o;
    };
    return d;
}

// ------------------------------------------------------------ building suites

Json building_params(const SuiteSpec& s, int n, int q) {
    return Json{{"n", s.n.value_or(n)}, {"q", check_q(s.q.value_or(q))}};
}

std::vector<Json> group_items(const std::vector<Mat>& g, int n, int q, const std::string& prefix) {
    std::vector<Json> out;
    for (std::size_t i = 0; i < g.size(); ++i)
        out.push_back({{"key", prefix + pad(i)}, {"n", n}, {"q", q}, {"g", g[i]}});
    return out;
}

long double power(long double b, int e) {
    long double r = 1;
    while (e-- > 0) r *= b;
    return r;
}

long double gl_order(int n, int q) {
    long double r = 1;
    for (int i = 0; i < n; ++i) r *= power(q, n) - power(q, i);
    return r;
}

SuiteDef gallery_coords() {
    SuiteDef d;
    d.name = "gallery-coords";
    d.always_witness = true;
    d.description = "gallery coordinates of every unitriangular element along every reduced word of w_0";
    d.resolve = [](const SuiteSpec& s) { return building_params(s, 4, 2); };
    d.plan = [](const Json& p, std::uint64_t, const Ctx& ctx) {
        const int n = p.at("n"), q = p.at("q");
        check_group_size(power(q, n * (n - 1) / 2), ctx, "unitriangular group");
        return group_items(bld::enum_unitriangular(n, q), n, q, "u");
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("n"), q = p.at("q");
        const Mat u = mat_of(p.at("g"));
        auto b = bld::Building::build(n, q);
        const bld::ApartmentChart c(b, standard_lines(*b));
        const auto K = bld::trace(bld::fixed_faces(b, u), c);
        const auto& rs = b->coxeter()->rs;
        std::map<std::pair<int, int>, int> min_factor;
        Outcome o;
        int words = 0;
        auto fail = [&](const std::string& why) {
            if (o.pass) o.detail["violation"] = why;
            o.pass = false;
            o.residual = 1;
        };
        for (const auto& word : bld::reduced_words_w0(n)) {
            ++words;
            std::vector<bld::GalleryFactor> fs;
            try {
                fs = bld::gallery_coordinates(c, u, word);
            } catch (const Error& e) {
                fail(std::string("no factorization: ") + e.what());
                continue;
            }
            Mat prod = bld::identity(n);
            for (const auto& f : fs) prod = bld::mul(prod, f.element, q);
            if (prod != u) fail("product does not reconstruct g");
            for (const auto& f : fs) {
                IVec alpha(n, 0);
                alpha[f.a] = 1;
                alpha[f.b] = -1;
                const int idx = rs.index_of(alpha);
                const auto& full = K.lambda_full();
                const auto& mini = K.lambda_min();
                if (std::find(full.begin(), full.end(), idx) == full.end() && f.lambda != 0)
                    fail("nontrivial factor outside Lambda");
                if (std::find(mini.begin(), mini.end(), idx) != mini.end()) {
                    auto [it, fresh] = min_factor.emplace(std::pair{f.a, f.b}, f.lambda);
                    if (!fresh && it->second != f.lambda) fail("Lambda^min factor depends on the word");
                }
            }
        }
        o.detail["words"] = words;
        o.detail["lambda_min"] = K.lambda_min();
        return o;
    };
    return d;
}

struct Transvection {
    bld::Frame frame;
    int a, b, lambda;
};

SuiteDef pihalf_ball() {
    SuiteDef d;
    d.name = "pihalf-ball";
    d.description = "Fix of a transvection equals the pi/2-ball about its root center";
    d.resolve = [](const SuiteSpec& s) {
        const int q = check_q(s.q.value_or(2));
        Json groups = Json::array();
        // n = 3 exhaustive, larger n sampled.
        if (!s.n) {
            groups.push_back({{"n", 3}, {"mode", "exhaustive"}});
            groups.push_back({{"n", 4}, {"mode", "sampled"}, {"samples", s.samples.value_or(10)}});
        } else if (*s.n <= 3) {
            groups.push_back({{"n", *s.n}, {"mode", "exhaustive"}});
        } else {
            groups.push_back({{"n", *s.n}, {"mode", "sampled"}, {"samples", s.samples.value_or(10)}});
        }
        return Json{{"q", q}, {"groups", groups}};
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx& ctx) {
        const int q = p.at("q");
        std::vector<Json> out;
        auto item = [&](const std::string& key, int n, const Transvection& t) {
            out.push_back({{"key", key}, {"n", n}, {"q", q}, {"frame", t.frame},
                           {"a", t.a}, {"b", t.b}, {"lambda", t.lambda}});
        };
        for (const auto& g : p.at("groups")) {
            const int n = g.at("n");
            check_group_size(gl_order(n, q), ctx, "GL(" + std::to_string(n) + ")");
            auto b = bld::Building::build(n, q);
            const auto& frames = frames_for(b, ctx);
            const std::string prefix = "n" + std::to_string(n) + "/";
            if (g.at("mode") == "exhaustive") {
                std::map<Mat, Transvection> seen;
                for (const auto& fr : frames) {
                    const bld::ApartmentChart c(b, fr);
                    for (int a = 0; a < n; ++a)
                        for (int bb = 0; bb < n; ++bb)
                            for (int l = 1; l < q; ++l)
                                if (a != bb) seen.emplace(bld::root_group_element(c, a, bb, l), Transvection{fr, a, bb, l});
                }
                int i = 0;
                for (const auto& [m, t] : seen) item(prefix + "t" + pad(i++), n, t);
            } else {
                const int samples = g.at("samples");
                for (int i = 0; i < samples; ++i) {
                    Rng rng(item_seed(seed, static_cast<std::uint64_t>(n) * 1000003 + i));
                    Transvection t;
                    t.frame = frames[rng.below(frames.size())];
                    t.a = rng.below_int(n);
                    t.b = rng.below_int(n - 1);
                    if (t.b >= t.a) ++t.b;
                    t.lambda = 1 + rng.below_int(q - 1);
                    item(prefix + "s" + pad(i), n, t);
                }
            }
        }
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("n"), q = p.at("q");
        auto b = bld::Building::build(n, q);
        const bld::ApartmentChart c(b, p.at("frame").get<bld::Frame>());
        const int a = p.at("a"), bb = p.at("b"), l = p.at("lambda");
        Outcome o;
        o.pass = bld::ball_equality(b, c, a, bb, l);
        o.residual = o.pass ? 0 : 1;
        o.detail = {{"g", bld::root_group_element(c, a, bb, l)}};
        return o;
    };
    return d;
}

SuiteDef dichotomy() {
    SuiteDef d;
    d.name = "dichotomy";
    d.always_witness = true;
    d.description = "every element of GL(n, F_q) fixes a subbuilding or has an incenter with radius <= pi/2";
    d.resolve = [](const SuiteSpec& s) { return building_params(s, 3, 2); };
    d.plan = [](const Json& p, std::uint64_t, const Ctx& ctx) {
        const int n = p.at("n"), q = p.at("q");
        check_group_size(gl_order(n, q), ctx, "GL(" + std::to_string(n) + ")");
        return group_items(bld::enum_gl(n, q, ctx.guards.max_group), n, q, "g");
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("n"), q = p.at("q");
        auto b = bld::Building::build(n, q);
        const auto r = bld::fix_incenter(b, mat_of(p.at("g")));
        Outcome o;
        o.detail = {{"status", bld::status_name(r.status)}};
        if (r.status == bld::FixStatus::subbuilding) return o;
        o.detail["radius"] = r.radius;
        o.residual = std::max(0.0, r.radius - M_PI / 2);
        o.pass = r.status == bld::FixStatus::ok && r.radius <= M_PI / 2 + 1e-9;
        return o;
    };
    return d;
}

SuiteDef incenter_independence() {
    SuiteDef d;
    d.name = "incenter-independence";
    d.always_witness = true;
    d.description = "f at fixed vertices agrees across supporting apartments for unipotent elements";
    d.resolve = [](const SuiteSpec& s) {
        const int q = check_q(s.q.value_or(2));
        Json groups = Json::array();
        if (!s.n) {
            groups.push_back({{"n", 3}, {"mode", "exhaustive"}});
            groups.push_back({{"n", 4}, {"mode", "sampled"}, {"samples", s.samples.value_or(10)}});
        } else if (*s.n <= 3) {
            groups.push_back({{"n", *s.n}, {"mode", "exhaustive"}});
        } else {
            groups.push_back({{"n", *s.n}, {"mode", "sampled"}, {"samples", s.samples.value_or(10)}});
        }
        return Json{{"q", q}, {"groups", groups}};
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx& ctx) {
        const int q = p.at("q");
        std::vector<Json> out;
        for (const auto& g : p.at("groups")) {
            const int n = g.at("n");
            const std::string prefix = "n" + std::to_string(n) + "/";
            if (g.at("mode") == "exhaustive") {
                check_group_size(gl_order(n, q), ctx, "GL(" + std::to_string(n) + ")");
                std::vector<Mat> uni;
                for (auto& m : bld::enum_gl(n, q, ctx.guards.max_group))
                    if (bld::is_unipotent(m, q)) uni.push_back(std::move(m));
                for (auto& j : group_items(uni, n, q, prefix + "u")) out.push_back(std::move(j));
            } else {
                const int samples = g.at("samples");
                for (int i = 0; i < samples; ++i) {
                    const auto s = item_seed(seed, static_cast<std::uint64_t>(n) * 1000003 + i);
                    Rng rng(s);
                    // A conjugate of a random non-identity unitriangular matrix.
                    Mat u = bld::identity(n);
                    while (u == bld::identity(n))
                        for (int r = 0; r < n; ++r)
                            for (int c = r + 1; c < n; ++c) u[r][c] = rng.below_int(q);
                    const Mat P = bld::random_invertible(n, q, rng);
                    const Mat g2 = bld::mul(bld::mul(P, u, q), bld::inverse(P, q), q);
                    out.push_back({{"key", prefix + "s" + pad(i)}, {"n", n}, {"q", q}, {"g", g2}, {"seed", s}});
                }
            }
        }
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("n"), q = p.at("q");
        auto b = bld::Building::build(n, q);
        bld::FixIncenterOptions opt;
        if (p.contains("seed")) opt.seed = p.at("seed").get<std::uint64_t>();
        const auto r = bld::fix_incenter(b, mat_of(p.at("g")), opt);
        Outcome o;
        o.detail = {{"status", bld::status_name(r.status)}};
        if (r.status == bld::FixStatus::subbuilding) return o;
        o.residual = r.max_discrepancy;
        o.pass = r.status == bld::FixStatus::ok && r.exact_agreement && r.max_discrepancy <= 1e-9;
        o.detail["supporting_apartments"] = r.supporting_apartments;
        o.detail["vertices_checked"] = r.vertices_checked;
        o.detail["evaluations"] = r.evaluations;
        o.detail["exact_agreement"] = r.exact_agreement;
        return o;
    };
    return d;
}

SuiteDef commuting_unipotent() {
    SuiteDef d;
    d.name = "commuting-unipotent";
    d.description = "commuting unitriangular pairs: unipotent product and a chamber fixed by both";
    d.resolve = [](const SuiteSpec& s) { return building_params(s, 4, 2); };
    d.plan = [](const Json& p, std::uint64_t, const Ctx& ctx) {
        const int n = p.at("n"), q = p.at("q");
        check_group_size(power(q, n * (n - 1) / 2), ctx, "unitriangular group");
        const auto U = bld::enum_unitriangular(n, q);
        std::vector<Json> out;
        for (std::size_t i = 0; i < U.size(); ++i)
            for (std::size_t j = i; j < U.size(); ++j)
                if (bld::mul(U[i], U[j], q) == bld::mul(U[j], U[i], q))
                    out.push_back({{"key", "p" + pad(i) + "-" + pad(j)}, {"n", n}, {"q", q},
                                   {"g1", U[i]}, {"g2", U[j]}});
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("n"), q = p.at("q");
        auto b = bld::Building::build(n, q);
        const Mat g1 = mat_of(p.at("g1")), g2 = mat_of(p.at("g2"));
        const auto w = bld::commuting_unipotent_witness(b, g1, g2);
        Outcome o;
        const bool fixed = !w.chamber.empty() && b->apply(g1, w.chamber) == w.chamber &&
                           b->apply(g2, w.chamber) == w.chamber;
        o.pass = fixed && w.product_unipotent && w.invariance;
        o.residual = o.pass ? 0 : 1;
        o.detail = {{"chamber", w.chamber},
                    {"product_unipotent", w.product_unipotent},
                    {"invariance", w.invariance},
                    {"chamber_fixed", fixed}};
        return o;
    };
    return d;
}

SuiteDef jordan_split() {
    SuiteDef d;
    d.name = "jordan-split";
    d.description = "Fix(uk) = Fix(u) cap Fix(k) for commuting unipotent u and diagonalizable k";
    d.resolve = [](const SuiteSpec& s) {
        auto j = building_params(s, 3, 3);
        j["samples"] = s.samples.value_or(20);
        return j;
    };
    d.plan = [](const Json& p, std::uint64_t seed, const Ctx& ctx) {
        const int n = p.at("n"), q = p.at("q");
        if (q == 2) throw DomainError("jordan-split needs q > 2");
        check_group_size(gl_order(n, q), ctx, "GL(" + std::to_string(n) + ")");
        auto b = bld::Building::build(n, q);
        const auto& frames = frames_for(b, ctx);
        std::vector<Json> out;
        const int samples = p.at("samples");
        for (int i = 0; i < samples; ++i) {
            Rng rng(item_seed(seed, i));
            const bld::Frame fr = frames[rng.below(frames.size())];
            const bld::ApartmentChart c(b, fr);
            const Mat& P = c.basis_matrix();
            const Mat Pi = bld::inverse(P, q);
            Mat u, k;
            // Redraw until u != 1 and k is not scalar; u commutes with k by
            // construction (nonzero entries only between equal eigenvalues).
            for (int attempt = 0; attempt < 1000; ++attempt) {
                std::vector<int> dg(n);
                for (auto& x : dg) x = 1 + rng.below_int(q - 1);
                Mat v = bld::identity(n), D(n, bld::Row(n, 0));
                for (int r = 0; r < n; ++r) {
                    D[r][r] = dg[r];
                    for (int cc = r + 1; cc < n; ++cc)
                        if (dg[r] == dg[cc]) v[r][cc] = rng.below_int(q);
                }
                u = bld::mul(bld::mul(P, v, q), Pi, q);
                k = bld::mul(bld::mul(P, D, q), Pi, q);
                const bool scalar = std::all_of(dg.begin(), dg.end(), [&](int x) { return x == dg[0]; });
                if (v != bld::identity(n) && !scalar) break;
            }
            out.push_back({{"key", "j" + pad(i)}, {"n", n}, {"q", q}, {"frame", fr}, {"u", u}, {"k", k}});
        }
        return out;
    };
    d.run = [](Json& p, const Ctx&) {
        const int n = p.at("n"), q = p.at("q");
        auto b = bld::Building::build(n, q);
        const Mat u = mat_of(p.at("u")), k = mat_of(p.at("k"));
        Outcome o;
        o.pass = bld::jordan_fix_check(b, u, k, p.at("frame").get<bld::Frame>());
        o.residual = o.pass ? 0 : 1;
        o.detail = {{"fixed_faces_uk", bld::fixed_faces(b, bld::mul(u, k, q)).faces().size()}};
        return o;
    };
    return d;
}

const std::vector<SuiteDef>& registry() {
    static const std::vector<SuiteDef> r = {
        lambda_an(),          lambda_bd(Family::D), lambda_bd(Family::B), lambda_min_calculus(),
        nicely_convex(),      induction_lemma(),    dn_example_suite(),   gallery_coords(),
        pihalf_ball(),        dichotomy(),          incenter_independence(), commuting_unipotent(),
        jordan_split(),       gn_recursion(),       vertex_poscodim(),
    };
    return r;
}

const SuiteDef& find_suite(const std::string& name) {
    for (const auto& s : registry())
        if (s.name == name) return s;
    throw DomainError("unknown suite '" + name + "'");
}

Item run_item(const SuiteDef& s, Json payload, const Ctx& ctx) {
    Item it;
    it.key = payload.at("key").get<std::string>();
    Outcome o;
    try {
        o = s.run(payload, ctx);
    } catch (const GuardError&) {
        throw;
    } catch (const CacheError&) {
        throw;
    } catch (const std::exception& e) {
        o.pass = false;
        o.residual = 1;
        o.detail = {{"error", e.what()}};
    }
    it.pass = o.pass;
    it.residual = o.residual;
    if (!o.pass || s.always_witness)
        it.witness = Json{{"suite", s.name}, {"payload", payload}, {"detail", o.detail}};
    return it;
}

}  // namespace

Summary Report::summary() const {
    Summary s;
    for (const auto& it : items) {
        (it.pass ? s.pass : s.fail)++;
        s.max_residual = std::max(s.max_residual, it.residual);
    }
    return s;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : registry()) v.push_back(s.name);
        return v;
    }();
    return names;
}

std::string suite_description(const std::string& name) { return find_suite(name).description; }

std::string version() { return BUILDINGLAB_VERSION; }

Report run_suite(const SuiteSpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteDef& def = find_suite(spec.name);
    if (spec.workers < 1) throw DomainError("workers must be positive");
    const Ctx ctx{spec.cache_dir, spec.guards};

    Report rep;
    rep.suite = def.name;
    rep.seed = spec.seed;
    rep.version = version();
    rep.params = def.resolve(spec);
    std::vector<Json> plan = def.plan(rep.params, spec.seed, ctx);
    if (plan.size() > spec.guards.max_items)
        throw GuardError("suite " + def.name + " would run " + std::to_string(plan.size()) + " items (limit " +
                         std::to_string(spec.guards.max_items) + ")");

    std::vector<Item> results(plan.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            try {
                results[i] = run_item(def, plan[i], ctx);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                next.store(plan.size());
                return;
            }
        }
    };
    const int workers = std::min<int>(spec.workers, std::max<std::size_t>(plan.size(), 1));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    std::stable_sort(results.begin(), results.end(), [](const Item& a, const Item& b) { return a.key < b.key; });
    rep.items = std::move(results);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

Item replay(const Json& witness, const std::string& cache_dir) {
    if (!witness.is_object() || !witness.contains("suite") || !witness.contains("payload"))
        throw DomainError("witness must be an object with 'suite' and 'payload'");
    const SuiteDef& def = find_suite(witness.at("suite").get<std::string>());
    return run_item(def, witness.at("payload"), Ctx{cache_dir, Guards{}});
}

std::vector<Item> replay_report(const Json& report, const std::string& cache_dir) {
    std::vector<Item> out;
    for (const auto& it : report.at("items"))
        if (it.contains("witness")) out.push_back(replay(it.at("witness"), cache_dir));
    return out;
}

Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw DomainError("unknown report format '" + s + "' (expected json or csv)");
}

Json to_json(const Report& r, bool include_wall_time) {
    Json items = Json::array();
    for (const auto& it : r.items) {
        Json j{{"key", it.key}, {"verdict", it.pass ? "pass" : "fail"}, {"residual", it.residual}};
        if (it.witness) j["witness"] = *it.witness;
        items.push_back(std::move(j));
    }
    const auto s = r.summary();
    Json out{{"suite", r.suite},
             {"params", r.params},
             {"seed", r.seed},
             {"items", std::move(items)},
             {"summary", {{"pass", s.pass}, {"fail", s.fail}, {"max_residual", s.max_residual}}},
             {"version", r.version},
             {"schema", kSchemaVersion}};
    if (include_wall_time) out["wall_time"] = r.wall_time;
    return out;
}

Report report_from_json(const Json& j) {
    Report r;
    try {
        r.suite = j.at("suite").get<std::string>();
        r.params = j.at("params");
        r.seed = j.at("seed").get<std::uint64_t>();
        r.version = j.at("version").get<std::string>();
        if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
        for (const auto& it : j.at("items")) {
            Item i;
            i.key = it.at("key").get<std::string>();
            const auto verdict = it.at("verdict").get<std::string>();
            if (verdict != "pass" && verdict != "fail") throw DomainError("bad verdict '" + verdict + "'");
            i.pass = verdict == "pass";
            i.residual = it.at("residual").get<double>();
            if (it.contains("witness")) i.witness = it.at("witness");
            r.items.push_back(std::move(i));
        }
    } catch (const Json::exception& e) {
        throw DomainError(std::string("malformed report: ") + e.what());
    }
    return r;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string render(const Report& r, Format format, bool include_wall_time) {
    if (format == Format::json) return to_json(r, include_wall_time).dump(2) + "\n";
    std::string out = "key,verdict,residual,witness\n";
    for (const auto& it : r.items) {
        out += csv_field(it.key) + "," + (it.pass ? "pass" : "fail") + "," + Json(it.residual).dump() + "," +
               (it.witness ? csv_field(it.witness->dump()) : "") + "\n";
    }
    return out;
}

void export_report(const Report& r, const std::string& path, Format format) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << render(r, format);
    f.flush();
    if (!f) throw Error("write to '" + path + "' failed");
}

std::string resolve_cache_dir(const std::string& cli_value) {
    if (!cli_value.empty()) return cli_value;
    if (const char* env = std::getenv(kCacheEnv)) return env;
    return "";
}

}  // namespace bl::harness
