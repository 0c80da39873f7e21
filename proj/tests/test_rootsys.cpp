#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "buildinglab/rootsys.hpp"

#include <set>

using namespace bl;
using namespace bl::rootsys;

namespace {

IVec e(int dim, int i, long long s = 1) {
    IVec v(dim, 0);
    v[i] = s;
    return v;
}

// Oracle: simple roots of each family in the standard realization.
std::vector<IVec> simple_roots(Family f, int n) {
    std::vector<IVec> out;
    const int m = f == Family::A ? n + 1 : n;
    for (int i = 0; i + 1 < (f == Family::A ? n + 1 : n); ++i) {
        IVec v(m, 0);
        v[i] = 1;
        v[i + 1] = -1;
        out.push_back(v);
    }
    if (f == Family::B || f == Family::BC) out.push_back(e(m, n - 1));
    if (f == Family::C) out.push_back(e(m, n - 1, 2));
    if (f == Family::D) {
        IVec v(m, 0);
        v[n - 2] = 1;
        v[n - 1] = 1;
        out.push_back(v);
    }
    return out;
}

// Oracle: group generated by simple reflections, as the tuple of basis images.
std::set<std::vector<IVec>> closure_from_simple(Family f, int n) {
    const int m = f == Family::A ? n + 1 : n;
    std::vector<IVec> id;
    for (int i = 0; i < m; ++i) id.push_back(e(m, i));
    std::set<std::vector<IVec>> seen{id};
    std::vector<std::vector<IVec>> stack{id};
    auto gens = simple_roots(f, n);
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        for (const auto& a : gens) {
            auto next = cur;
            for (auto& v : next) v = reflect(v, a);
            if (seen.insert(next).second) stack.push_back(next);
        }
    }
    return seen;
}

std::set<std::vector<IVec>> as_images(const RootSystem& rs, const std::vector<WeylElement>& w) {
    std::set<std::vector<IVec>> out;
    for (const auto& g : w) {
        std::vector<IVec> img;
        for (int i = 0; i < rs.ambient_dim; ++i) img.push_back(g.apply(e(rs.ambient_dim, i)));
        out.insert(img);
    }
    return out;
}

}  // namespace

TEST_CASE("root counts match closed forms") {
    for (int n = 2; n <= 7; ++n) CHECK(build_root_system(Family::A, n).roots.size() == std::size_t(n * (n + 1)));
    for (int n = 2; n <= 6; ++n) {
        CHECK(build_root_system(Family::B, n).roots.size() == std::size_t(2 * n * n));
        CHECK(build_root_system(Family::C, n).roots.size() == std::size_t(2 * n * n));
        CHECK(build_root_system(Family::BC, n).roots.size() == std::size_t(2 * n * n + 2 * n));
    }
    for (int n = 3; n <= 6; ++n)
        CHECK(build_root_system(Family::D, n).roots.size() == std::size_t(2 * n * (n - 1)));
}

TEST_CASE("build_root_system examples") {
    auto a2 = build_root_system(Family::A, 2);
    CHECK(a2.roots.size() == 6);
    for (int s : a2.squared_length) CHECK(s == 2);
    CHECK(build_root_system(Family::D, 4).roots.size() == 24);
    auto bc3 = build_root_system(Family::BC, 3);
    int short_ = 0, mid = 0, long_ = 0;
    for (int s : bc3.squared_length) (s == 1 ? short_ : s == 2 ? mid : long_)++;
    CHECK(short_ == 6);
    CHECK(mid == 12);
    CHECK(long_ == 6);
    CHECK(std::is_sorted(bc3.roots.begin(), bc3.roots.end()));
}

TEST_CASE("rank guards and typed errors") {
    CHECK_THROWS_AS(build_root_system(Family::A, 8), DomainError);
    CHECK_THROWS_AS(build_root_system(Family::B, 7), DomainError);
    CHECK_THROWS_AS(build_root_system(Family::D, 2), DomainError);
    CHECK_THROWS_AS(build_root_system(Family::A, 1), DomainError);
    auto d3 = build_root_system(Family::D, 3);
    CHECK(d3.warnings.size() == 1);
    CHECK(d3.roots.size() == 12);
    CHECK_THROWS_AS(weyl_enumerate(build_root_system(Family::B, 6), 1000), GuardError);
}

TEST_CASE("root system invariants") {
    for (Family f : {Family::A, Family::B, Family::C, Family::D, Family::BC})
        for (int n = (f == Family::D ? 3 : 2); n <= 5; ++n) {
            auto rs = build_root_system(f, n);
            for (std::size_t i = 0; i < rs.roots.size(); ++i) {
                IVec neg = rs.roots[i];
                for (auto& c : neg) c = -c;
                CHECK(rs.index_of(neg) >= 0);
                for (const auto& a : rs.roots) CHECK(rs.index_of(reflect(rs.roots[i], a)) >= 0);
                IVec dbl = rs.roots[i];
                for (auto& c : dbl) c *= 2;
                bool has_double = rs.index_of(dbl) >= 0;
                CHECK(has_double == !rs.is_reduced(i));
                if (f == Family::BC) CHECK(has_double == (rs.squared_length[i] == 1));
                else CHECK_FALSE(has_double);
            }
        }
}

TEST_CASE("Weyl enumeration agrees with simple-reflection closure") {
    CHECK(weyl_enumerate(build_root_system(Family::A, 2)).size() == 6);
    CHECK(weyl_enumerate(build_root_system(Family::D, 4)).size() == 192);
    CHECK(weyl_enumerate(build_root_system(Family::B, 3)).size() == 48);
    for (Family f : {Family::A, Family::B, Family::C, Family::D, Family::BC})
        for (int n = (f == Family::D ? 3 : 2); n <= 4; ++n) {
            auto rs = build_root_system(f, n);
            auto w = weyl_enumerate(rs);
            CHECK(w.size() == weyl_order(f, n));
            CHECK(as_images(rs, w) == closure_from_simple(f, n));
        }
}

TEST_CASE("Weyl group is a group and acts on roots bijectively") {
    auto rs = build_root_system(Family::D, 4);
    auto w = weyl_enumerate(rs);
    std::set<WeylElement> all(w.begin(), w.end());
    CHECK(all.count(weyl_identity(rs)) == 1);
    for (std::size_t i = 0; i < w.size(); i += 7) {
        CHECK(all.count(w[i].inverse()) == 1);
        CHECK(w[i].compose(w[i].inverse()) == weyl_identity(rs));
        for (std::size_t j = 0; j < w.size(); j += 11) CHECK(all.count(w[i].compose(w[j])) == 1);
        std::set<IVec> img;
        for (const auto& r : rs.roots) img.insert(w[i].apply(r));
        CHECK(img == std::set<IVec>(rs.roots.begin(), rs.roots.end()));
    }
    // compose is composition of maps
    IVec x{1, 2, 3, 4};
    CHECK(w[5].compose(w[17]).apply(x) == w[5].apply(w[17].apply(x)));
}

TEST_CASE("reflect examples") {
    IVec a{1, -1, 0};
    IVec na{-1, 1, 0};
    CHECK(reflect(a, a) == na);
    IVec x{1, 1, 5};
    CHECK(reflect(x, a) == x);
    CHECK(reflect(IVec{1, 0, 0}, a) == IVec{0, 1, 0});
    QVec q{Rational(1, 3), Rational(2), Rational(0)};
    CHECK(reflect(reflect(q, a), a) == q);
}

TEST_CASE("vertex realization examples") {
    auto a3 = build_root_system(Family::A, 3);
    CHECK(vertex_realization(a3, 1).coords == IVec{3, -1, -1, -1});
    auto d4 = build_root_system(Family::D, 4);
    CHECK(vertex_realization(d4, 4).coords == IVec{0, 0, 0, 1});
    CHECK(vertex_realization(d4, 2).coords == IVec{-1, 1, 1, 1});
    CHECK_THROWS_AS(vertex_realization(d4, 5), DomainError);
    for (int n = 2; n <= 6; ++n) {
        auto rs = build_root_system(Family::A, n);
        for (int k = 1; k <= n; ++k) {
            auto v = vertex_realization(rs, k).coords;
            long long s = 0;
            for (auto c : v) s += c;
            CHECK(s == 0);
            CHECK(dot(v, v) == k * (n + 1 - k) * (n + 1));
        }
    }
    for (int n = 4; n <= 6; ++n) {
        auto rs = build_root_system(Family::D, n);
        for (int i = 1; i <= n; ++i) {
            auto v = vertex_realization(rs, i).coords;
            CHECK(dot(v, v) == (i == 2 ? n : n + 1 - i));
        }
    }
}

TEST_CASE("model vertex orbit equals all vertices of its type") {
    for (Family f : {Family::A, Family::B, Family::D})
        for (int n = (f == Family::D ? 4 : 2); n <= 4; ++n) {
            auto rs = build_root_system(f, n);
            auto w = weyl_enumerate(rs);
            const int m = rs.ambient_dim;
            for (int t = 1; t <= n; ++t) {
                std::set<IVec> orbit;
                for (const auto& g : w) orbit.insert(g.apply(vertex_realization(rs, t).coords));
                // Oracle: every vector of the right shape, by brute force over a box.
                std::set<IVec> shape;
                const long long lo = f == Family::A ? -n : -1, hi = f == Family::A ? n : 1;
                IVec v(m, lo);
                while (true) {
                    bool ok;
                    if (f == Family::A) {
                        int pos = 0;
                        for (auto c : v) pos += c > 0;
                        ok = pos == t;
                        for (auto c : v) ok = ok && (c == n + 1 - t || c == -t);
                    } else {
                        int nz = 0, minus = 0;
                        for (auto c : v) {
                            nz += c != 0;
                            minus += c < 0;
                        }
                        if (f == Family::B) ok = nz == n + 1 - t;
                        else if (t == 1) ok = nz == n && minus % 2 == 0;
                        else if (t == 2) ok = nz == n && minus % 2 == 1;
                        else ok = nz == n + 1 - t;
                    }
                    if (ok) shape.insert(v);
                    int i = 0;
                    while (i < m && v[i] == hi) v[i++] = lo;
                    if (i == m) break;
                    ++v[i];
                }
                CHECK(orbit == shape);
                for (const auto& x : orbit) CHECK(vertex_type(rs, x) == t);
            }
        }
}

TEST_CASE("root orbits") {
    auto a3 = root_orbits(build_root_system(Family::A, 3));
    REQUIRE(a3.size() == 1);
    CHECK(a3[0].size() == 12);
    auto b3 = root_orbits(build_root_system(Family::B, 3));
    REQUIRE(b3.size() == 2);
    CHECK(b3[0].size() == 6);
    CHECK(b3[1].size() == 12);
    auto bc3 = root_orbits(build_root_system(Family::BC, 3));
    REQUIRE(bc3.size() == 3);
    CHECK(bc3[0].size() == 6);
    CHECK(bc3[1].size() == 12);
    CHECK(bc3[2].size() == 6);
    CHECK(root_orbits(build_root_system(Family::D, 4)).size() == 1);
    CHECK(root_orbits(build_root_system(Family::C, 3)).size() == 2);
}

TEST_CASE("simply-laced mutual cosines") {
    for (auto [f, n] : {std::pair{Family::A, 3}, std::pair{Family::D, 4}, std::pair{Family::A, 5}}) {
        auto rs = build_root_system(f, n);
        for (const auto& a : rs.roots)
            for (const auto& b : rs.roots) {
                // cos = <a,b>/2 must lie in {-1,-1/2,0,1/2,1}
                long long ip = dot(a, b);
                CHECK((ip == -2 || ip == -1 || ip == 0 || ip == 1 || ip == 2));
            }
    }
}

TEST_CASE("Weyl cache roundtrip and corruption detection") {
    auto rs = build_root_system(Family::B, 3);
    auto w = weyl_enumerate(rs);
    auto text = serialize_weyl(rs, w);
    CHECK(deserialize_weyl(rs, text) == w);
    CHECK_THROWS_AS(deserialize_weyl(rs, "garbage"), CacheError);
    auto bad = text;
    bad.replace(bad.find("| 1"), 3, "| 7");
    CHECK_THROWS_AS(deserialize_weyl(rs, bad), CacheError);
    CHECK_THROWS_AS(deserialize_weyl(build_root_system(Family::B, 2), text), CacheError);
}
