#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "buildinglab/coxgeom.hpp"

#include <cmath>
#include <set>

using namespace bl;
using namespace bl::cox;
using rootsys::Family;

namespace {

ComplexPtr C(Family f, int n) { return CoxeterComplex::build(f, n); }

int root_index(const CoxeterComplex& cx, IVec r) { return cx.rs.index_of(r); }

IVec sum_of(const CoxeterComplex& cx, const std::vector<int>& vs) {
    IVec p(cx.ambient_dim(), 0);
    for (int v : vs)
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += cx.vertices[v][i];
    return p;
}

// Oracle: vertex set of an intersection of hemispheres, straight from the definition.
std::set<int> vertex_set(const CoxeterComplex& cx, const std::vector<IVec>& hs) {
    std::set<int> out;
    for (std::size_t v = 0; v < cx.vertices.size(); ++v) {
        bool in = true;
        for (const auto& h : hs) in = in && dot(cx.vertices[v], h) >= 0;
        if (in) out.insert(static_cast<int>(v));
    }
    return out;
}

// Oracle for top-dimensional K: a hemisphere of Lambda_K is minimal iff
// dropping it from Lambda_K enlarges the vertex set.
std::set<int> minimal_by_removal(const ConvexSubcomplex& K) {
    const auto& cx = K.complex();
    const auto full = vertex_set(cx, K.hemispheres());
    std::set<int> out;
    for (int h : K.lambda_full()) {
        std::vector<IVec> rest;
        for (int g : K.lambda_full())
            if (g != h) rest.push_back(cx.rs.roots[g]);
        if (vertex_set(cx, rest) != full) out.insert(h);
    }
    return out;
}

long long fubini(int n) {
    std::vector<long long> a(n + 1, 0);
    a[0] = 1;
    for (int m = 1; m <= n; ++m) {
        long long binom = 1;
        for (int k = 1; k <= m; ++k) {
            binom = binom * (m - k + 1) / k;
            a[m] += binom * a[m - k];
        }
    }
    return a[n];
}

}  // namespace

TEST_CASE("ExactScalar arithmetic and order") {
    auto a = ExactScalar::sqrt_of(Rational(8));
    CHECK(a.coefficient() == 2);
    CHECK(a.radicand() == 2);
    CHECK(ExactScalar::ratio_sqrt(1, 3) == ExactScalar::sqrt_of(Rational(1, 3)));
    CHECK((a * a).is_rational());
    CHECK((a / ExactScalar::sqrt_of(Rational(2))) == ExactScalar::rational(2));
    CHECK(ExactScalar::sqrt_of(Rational(2)) < ExactScalar::rational(Rational(3, 2)));
    CHECK(-ExactScalar::sqrt_of(Rational(2)) < ExactScalar::rational(-1));
    CHECK(ExactScalar::sqrt_of(Rational(3)) > ExactScalar::sqrt_of(Rational(2)));
    CHECK(ExactScalar() == ExactScalar::rational(0));
    CHECK(sign_of_sum(ExactScalar::sqrt_of(Rational(2)), ExactScalar::rational(Rational(-7, 5))) == 1);
    CHECK_THROWS_AS(ExactScalar::sqrt_of(Rational(2)) + ExactScalar::sqrt_of(Rational(3)), DomainError);
    CHECK(std::abs(ExactScalar::sqrt_of(Rational(2, 3)).to_double() - std::sqrt(2.0 / 3)) < 1e-15);
}

TEST_CASE("complex sizes") {
    CHECK(C(Family::A, 2)->chambers.size() == 6);
    CHECK(C(Family::A, 2)->vertices.size() == 6);
    CHECK(C(Family::A, 3)->chambers.size() == 24);
    CHECK(C(Family::A, 3)->vertices.size() == 14);
    CHECK(C(Family::D, 4)->chambers.size() == 192);
    CHECK(C(Family::B, 3)->chambers.size() == 48);
    // Faces of the A_n complex are ordered set partitions of n+1 points into >= 2 blocks.
    for (int n = 2; n <= 4; ++n)
        CHECK(enumerate_faces(*C(Family::A, n)).size() == static_cast<std::size_t>(fubini(n + 1) - 1));
    CHECK(enumerate_faces(*C(Family::A, 2)).size() == 12);
    CHECK(enumerate_faces(*C(Family::A, 3)).size() == 74);
    CHECK_THROWS_AS(enumerate_faces(*C(Family::A, 3), 10), GuardError);
    // Every face's vertices are pairwise non-antipodal.
    for (const auto& f : enumerate_faces(*C(Family::D, 4))) {
        const auto& cx = *C(Family::D, 4);
        for (int a : f.vertices)
            for (int b : f.vertices)
                CHECK(cos_dist(to_double(cx.vertices[a]), to_double(cx.vertices[b])) > -1 + 1e-12);
    }
}

TEST_CASE("cos_dist examples") {
    QVec v = to_rational(IVec{3, -1, -1, -1});
    CHECK(cos_dist(v, v) == ExactScalar::rational(1));
    CHECK(cos_dist(to_rational(IVec{1, -1, 0}), to_rational(IVec{1, 0, -1})) ==
          ExactScalar::rational(Rational(1, 2)));
    CHECK(cos_dist(v, to_rational(IVec{1, 1, -1, -1})) == ExactScalar::sqrt_of(Rational(1, 3)));
    CHECK(std::abs(dist(Vec{1, 0}, Vec{-1, 1e-20}) - M_PI) < 1e-12);
}

TEST_CASE("join distance") {
    CHECK(join_distance({1}, {1}, {0.7}) == doctest::Approx(0.7));
    CHECK(join_distance({1, 0}, {0, 1}, {0.3, 1.1}) == doctest::Approx(M_PI / 2));
    for (int n = 1; n <= 5; ++n)
        for (double d : {0.0, 0.4, 1.3, 2.9}) {
            std::vector<double> a(n, 1 / std::sqrt(double(n))), dd(n, d);
            CHECK(join_distance(a, a, dd) == doctest::Approx(d).epsilon(1e-9));
        }
    // S^1-model: embed each pair on a circle, read off the round distance.
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(3), b(3), d(3);
        for (int i = 0; i < 3; ++i) {
            a[i] = rng.uniform();
            b[i] = rng.uniform();
            d[i] = M_PI * rng.uniform();
        }
        Vec an = normalized(a), bn = normalized(b);
        Vec p(6), q(6);
        for (int i = 0; i < 3; ++i) {
            p[2 * i] = an[i];
            q[2 * i] = bn[i] * std::cos(d[i]);
            q[2 * i + 1] = bn[i] * std::sin(d[i]);
        }
        CHECK(join_distance(an, bn, d) == doctest::Approx(dist(p, q)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(join_distance({1}, {1, 0}, {0.1}), DomainError);
}

TEST_CASE("Lambda examples") {
    auto a2 = C(Family::A, 2);
    int al = root_index(*a2, {1, -1, 0});
    auto K = ConvexSubcomplex::from_root_indices(a2, {al});
    CHECK(K.lambda_min() == std::vector<int>{al});
    CHECK(K.is_top_dimensional());
    auto S = ConvexSubcomplex::whole(a2);
    CHECK(S.lambda_full().empty());
    CHECK(S.is_whole_ambient());

    // A closed chamber of A_2: all three positive roots contain it, only the
    // two walls are facets.
    auto ch = ConvexSubcomplex::hull_of_vertices(a2, a2->chambers[0]);
    CHECK(ch.lambda_full().size() == 3);
    CHECK(ch.lambda_min().size() == 2);
    CHECK(std::set<int>(ch.lambda_min().begin(), ch.lambda_min().end()) == minimal_by_removal(ch));
    CHECK(ch.vertices().size() == 2);

    // Lambda of a single root in A_3: every other member has its wall through x_alpha.
    auto a3 = C(Family::A, 3);
    IVec x{1, 0, 0, -1};
    auto R = ConvexSubcomplex::from_roots(a3, {x});
    for (int h : R.lambda_full())
        if (a3->rs.roots[h] != x) CHECK(dot(a3->rs.roots[h], x) == 0);
    CHECK(R.lambda_min().size() == 1);

    // Hull of the vertices strictly inside the root e1-e4 (faces in the open
    // pi/2-ball about x_alpha). Facet oracle: the four roots at pi/3; alpha
    // itself is redundant.
    std::vector<int> inside;
    for (std::size_t v = 0; v < a3->vertices.size(); ++v)
        if (dot(a3->vertices[v], x) > 0) inside.push_back(static_cast<int>(v));
    auto B = ConvexSubcomplex::hull_of_vertices(a3, inside);
    std::set<int> expect;
    for (int h : a3->hemisphere_roots)
        if (dot(a3->rs.roots[h], x) == 1) expect.insert(h);
    CHECK(std::set<int>(B.lambda_min().begin(), B.lambda_min().end()) == expect);
    CHECK(std::set<int>(B.lambda_min().begin(), B.lambda_min().end()) == minimal_by_removal(B));
    CHECK(std::count(B.lambda_full().begin(), B.lambda_full().end(), root_index(*a3, x)) == 1);
}

TEST_CASE("Lambda_min calculus on random root intersections") {
    Rng rng(2024);
    for (auto [f, n] : {std::pair{Family::A, 3}, {Family::B, 3}, {Family::D, 4}}) {
        auto cx = C(f, n);
        int tested = 0;
        for (int trial = 0; trial < 150; ++trial) {
            std::vector<int> roots;
            const int k = 1 + rng.below_int(4);
            for (int i = 0; i < k; ++i)
                roots.push_back(cx->hemisphere_roots[rng.below(cx->hemisphere_roots.size())]);
            std::optional<ConvexSubcomplex> K;
            try {
                K = ConvexSubcomplex::from_root_indices(cx, roots);
            } catch (const DomainError&) {
                continue;
            }
            ++tested;
            const auto V = std::set<int>(K->vertices().begin(), K->vertices().end());
            for (int h : K->lambda_min())
                CHECK(std::find(K->lambda_full().begin(), K->lambda_full().end(), h) !=
                      K->lambda_full().end());
            // Both hemisphere lists cut out V(K) inside span(K).
            for (const auto* list : {&K->lambda_full(), &K->lambda_min()}) {
                std::set<int> got;
                for (std::size_t v = 0; v < cx->vertices.size(); ++v) {
                    if (!in_span(K->span_basis(), cx->vertices[v])) continue;
                    bool in = true;
                    for (int h : *list) in = in && dot(cx->vertices[v], cx->rs.roots[h]) >= 0;
                    if (in) got.insert(static_cast<int>(v));
                }
                CHECK(got == V);
            }
            if (K->is_top_dimensional())
                CHECK(std::set<int>(K->lambda_min().begin(), K->lambda_min().end()) ==
                      minimal_by_removal(*K));
        }
        CHECK(tested > 50);
    }
}

TEST_CASE("f_K examples and errors") {
    auto a3 = C(Family::A, 3);
    auto w = WeightAssignment::standard(a3->rs);
    IVec al{1, -1, 0, 0};
    auto K = ConvexSubcomplex::from_roots(a3, {al});
    CHECK(f_K_exact(K, w, to_rational(al)).value == ExactScalar::rational(-1));
    CHECK(f_K(K, w, to_double(al)).value == doctest::Approx(-1));
    CHECK(f_K_exact(K, w, to_rational(IVec{1, 1, -1, -1})).value == ExactScalar());
    auto fv = f_K_exact(K, w, to_rational(IVec{3, -1, -1, -1}));
    CHECK(fv.value == -ExactScalar::sqrt_of(Rational(2, 3)));
    CHECK(fv.active == std::vector<int>{root_index(*a3, al)});
    CHECK_THROWS_AS(f_K(K, w, Vec{-1, 1, 0, 0}), HypothesisError);
    CHECK_THROWS_AS(f_K_exact(K, w, to_rational(IVec{-1, 1, 0, 0})), HypothesisError);
    // Whole sphere: identically zero.
    auto S = ConvexSubcomplex::whole(a3);
    CHECK(f_K(S, w, Vec{0.3, -0.1, 0.5, -0.7}).value == 0.0);
    // Not top-dimensional.
    auto L = ConvexSubcomplex::from_roots(a3, {al, IVec{-1, 1, 0, 0}});
    CHECK_FALSE(L.is_top_dimensional());
    CHECK_THROWS_AS(f_K(L, w, Vec{0, 0, 1, -1}), HypothesisError);
}

TEST_CASE("f over Lambda agrees with f over Lambda_min") {
    Rng rng(77);
    for (auto [f, n] : {std::pair{Family::A, 3}, {Family::B, 3}, {Family::D, 4}, {Family::BC, 3}}) {
        auto cx = C(f, n);
        auto w = WeightAssignment::standard(cx->rs, f == Family::BC ? 2 : 1);
        for (int t = 0; t < 20; ++t) {
            auto K = random_chamber_subcomplex(cx, rng, 5);
            for (int i = 0; i < 200; ++i) {
                auto e = f_K(K, w, random_point(K, rng));
                CHECK(std::abs(e.value - e.value_full) <= 1e-12);
            }
            for (int v : K.vertices()) {
                auto e = f_K_exact(K, w, to_rational(cx->vertices[v]));
                CHECK(e.value == e.value_full);
                CHECK(std::abs(e.value.to_double() - f_K(K, w, to_double(cx->vertices[v])).value) < 1e-12);
            }
        }
    }
}

TEST_CASE("monotonicity for nested subcomplexes") {
    Rng rng(5);
    for (auto [f, n] : {std::pair{Family::A, 3}, {Family::D, 4}, {Family::B, 3}}) {
        auto cx = C(f, n);
        auto w = WeightAssignment::standard(cx->rs);
        for (int t = 0; t < 40; ++t) {
            std::vector<int> ch;
            auto K1 = random_chamber_subcomplex(cx, rng, 3, &ch);
            // K2 = K1 cut by further roots containing the same chamber.
            const IVec p = sum_of(*cx, ch);
            std::vector<IVec> h = K1.hemispheres();
            for (int r : cx->hemisphere_roots)
                if (dot(p, cx->rs.roots[r]) > 0 && rng.below(3) == 0) h.push_back(cx->rs.roots[r]);
            auto K2 = ConvexSubcomplex::from_roots(cx, h);
            for (int v : K2.vertices()) {
                QVec x = to_rational(cx->vertices[v]);
                CHECK(f_K_exact(K1, w, x).value <= f_K_exact(K2, w, x).value);
            }
        }
    }
}

TEST_CASE("lambda tables") {
    CHECK(lambda_table(Family::A, 3, 2) == ExactScalar::sqrt_of(Rational(1, 2)));
    CHECK(lambda_table(Family::D, 4, 3) == ExactScalar::rational(Rational(1, 2)));
    CHECK(lambda_table(Family::D, 4, 4) == ExactScalar::sqrt_of(Rational(1, 2)));
    CHECK(lambda_table(Family::D, 5, 2) == lambda_table(Family::D, 5, 1));
    CHECK_THROWS_AS(lambda_table(Family::A, 3, 4), DomainError);
}

TEST_CASE("A_n vertex constancy") {
    for (int n = 2; n <= 6; ++n) {
        auto cx = C(Family::A, n);
        for (std::size_t v = 0; v < cx->vertices.size(); ++v) {
            const IVec& x = cx->vertices[v];
            const int k = static_cast<int>(std::count_if(x.begin(), x.end(), [](long long c) { return c > 0; }));
            const auto expect = ExactScalar::sqrt_of(Rational(n + 1, 2 * k * (n + 1 - k)));
            for (const auto& a : cx->rs.roots)
                if (dot(x, a) > 0) CHECK(cos_dist(to_rational(x), to_rational(a)) == expect);
        }
    }
}

TEST_CASE("D_n and B_n vertex values") {
    for (auto [f, n] : {std::pair{Family::D, 4}, {Family::D, 5}, {Family::B, 3}, {Family::B, 4},
                        {Family::C, 3}, {Family::BC, 3}}) {
        auto cx = C(f, n);
        auto w = WeightAssignment::standard(cx->rs);
        auto val = [&](int v, int r) { return incidence_value(*cx, w, to_rational(cx->vertices[v]), r); };
        for (std::size_t v = 0; v < cx->vertices.size(); ++v) {
            const int i = cx->vertex_types[v];
            const auto lam = lambda_table(f, n, i);
            for (int r : cx->hemisphere_roots) {
                if (dot(cx->vertices[v], cx->rs.roots[r]) <= 0) continue;
                const auto s = val(static_cast<int>(v), r);
                CHECK((s == lam || s == lam * Rational(2)));
                if (f == Family::D && i == n) CHECK(s == lam);
                if (f == Family::D && i <= 2) CHECK(s == lambda_table(f, n, 1) * Rational(2));
            }
        }
        for (int i = 1; i <= n; ++i) {
            if (f == Family::C) CHECK(lambda_table(f, n, i) == ExactScalar::sqrt_of(Rational(1, 2 * (n + 1 - i))));
            if (f == Family::B || f == Family::BC)
                CHECK(lambda_table(f, n, i) == ExactScalar::sqrt_of(Rational(1, n + 1 - i)));
        }
        if (f == Family::D) {
            for (int i = 1; i <= n; ++i)
                if (i != 2) CHECK(lambda_table(f, n, i) == ExactScalar::sqrt_of(Rational(1, 2 * (n + 1 - i))));
        }
        // Adjacency refinement over edges of chambers.
        for (const auto& ch : cx->chambers)
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) {
                    const int vi = ch[a], vj = ch[b];  // types a+1 < b+1
                    const int j = b + 1;
                    if (f == Family::D && j < 3) continue;
                    for (int r : cx->hemisphere_roots) {
                        if (dot(cx->vertices[vi], cx->rs.roots[r]) < 0 || dot(cx->vertices[vj], cx->rs.roots[r]) < 0)
                            continue;
                        if (val(vj, r) == lambda_table(f, n, j) * Rational(2))
                            CHECK_MESSAGE(val(vi, r) == lambda_table(f, n, a + 1) * Rational(2), rootsys::family_name(f) << n << " i=" << a + 1 << " j=" << j << " vi=" << val(vi, r).str() << " lam=" << lambda_table(f, n, a + 1).str());
                    }
                }
    }
}

TEST_CASE("link direction") {
    auto ld = link_direction(std::vector<IVec>{{1, 0}}, to_rational(IVec{1, 1}));
    CHECK(ld.direction == QVec{0, 1});
    CHECK(ld.sin_dist == ExactScalar::sqrt_of(Rational(1, 2)));
    auto orth = link_direction(std::vector<IVec>{{1, 0, 0}}, to_rational(IVec{0, 2, 1}));
    CHECK(orth.sin_dist == ExactScalar::rational(1));
    CHECK_THROWS_AS(link_direction(std::vector<IVec>{{1, 0}}, to_rational(IVec{2, 0})), DomainError);
    CHECK_THROWS_AS(link_direction(std::vector<IVec>{{1, 0}}, Vec{2, 0}), DomainError);

    // A_3, s through the vertex (3,-1,-1,-1), y = barycenter of a chamber at that vertex.
    auto a3 = C(Family::A, 3);
    const IVec v{3, -1, -1, -1};
    const int vi = a3->find_vertex(v);
    for (const auto& ch : a3->chambers) {
        if (std::find(ch.begin(), ch.end(), vi) == ch.end()) continue;
        Vec y(4, 0.0);
        for (int u : ch) {
            Vec un = normalized(to_double(a3->vertices[u]));
            for (int i = 0; i < 4; ++i) y[i] += un[i];
        }
        auto lf = link_direction(std::vector<IVec>{v}, y);
        // Dense oracle: min distance from y to the great circle through +-v and -v.
        Vec vn = normalized(to_double(v));
        double best = 10;
        for (int t = 0; t <= 200000; ++t) {
            double s = -1 + 2.0 * t / 200000;
            Vec p = vn;
            for (auto& c : p) c *= s;
            // the singular sphere spanned by one vertex is {+-v}
            if (s == 0) continue;
            best = std::min(best, dist(p, y));
        }
        CHECK(std::sin(best) == doctest::Approx(lf.sin_dist).epsilon(1e-9));
        CHECK(std::abs(dot(lf.direction, vn)) < 1e-12);
        break;
    }
    // Edge-spanned circle: dense sampling over the circle.
    const auto& ch = a3->chambers[5];
    std::vector<IVec> s{a3->vertices[ch[0]], a3->vertices[ch[1]]};
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        Vec y{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        double m = (y[0] + y[1] + y[2] + y[3]) / 4;
        for (auto& c : y) c -= m;
        auto ortho = [&] {
            Vec a = normalized(to_double(s[0])), b = to_double(s[1]);
            double c = dot(a, b);
            for (int i = 0; i < 4; ++i) b[i] -= c * a[i];
            return std::pair{a, normalized(b)};
        }();
        double best = 10;
        for (int k = 0; k < 100000; ++k) {
            double th = 2 * M_PI * k / 100000;
            Vec p(4);
            for (int i = 0; i < 4; ++i) p[i] = std::cos(th) * ortho.first[i] + std::sin(th) * ortho.second[i];
            best = std::min(best, dist(p, y));
        }
        CHECK(std::sin(best) == doctest::Approx(link_direction(s, y).sin_dist).epsilon(1e-6));
    }
}

TEST_CASE("links of A_3 vertices") {
    auto a3 = C(Family::A, 3);
    for (const IVec& v : {IVec{3, -1, -1, -1}, IVec{2, 2, -2, -2}}) {
        int orth = 0;
        for (const auto& r : a3->rs.roots) orth += dot(r, v) == 0;
        const int vi = a3->find_vertex(v);
        const bool k1 = v[0] == 3;
        CHECK(orth == (k1 ? 6 : 4));  // A_2 versus A_1 x A_1
        for (const auto& ch : a3->chambers) {
            if (std::find(ch.begin(), ch.end(), vi) == ch.end()) continue;
            auto K = ConvexSubcomplex::hull_of_vertices(a3, ch);
            auto L = link_subcomplex(K, {v});
            REQUIRE(L.induced_roots.size() == 2);
            // Dihedral angle of the link chamber: pi/3 for A_2, pi/2 for A_1 x A_1.
            Vec a = to_double(a3->rs.roots[L.induced_roots[0]]);
            Vec b = to_double(a3->rs.roots[L.induced_roots[1]]);
            CHECK(cos_dist(a, b) == doctest::Approx(k1 ? -0.5 : 0.0));
        }
    }
}

TEST_CASE("CH(K,s) and the induction identity") {
    Rng rng(99);
    int checked = 0;
    for (auto [f, n] : {std::pair{Family::A, 3}, {Family::B, 3}, {Family::D, 4}}) {
        auto cx = C(f, n);
        auto w = WeightAssignment::standard(cx->rs);
        for (int t = 0; t < 40; ++t) {
            auto K = random_chamber_subcomplex(cx, rng, 4);
            // A face in the boundary: vertices of K on the wall of a minimal root.
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
            auto CH = ch_with_sphere(K, s);
            // Definitional hull of K together with the sphere s.
            std::vector<int> gen = K.vertices();
            for (std::size_t v = 0; v < cx->vertices.size(); ++v)
                if (in_span(s, cx->vertices[v])) gen.push_back(static_cast<int>(v));
            auto H = ConvexSubcomplex::hull_of_vertices(cx, gen);
            CHECK(CH.vertices() == H.vertices());

            auto L = link_subcomplex(K, s);
            for (int i = 0; i < 25; ++i) {
                Vec y = random_point(K, rng);
                LinkDirectionF d;
                try {
                    d = link_direction(s, y);
                } catch (const DomainError&) {
                    continue;
                }
                const double lhs = f_K(CH, w, y).value;
                const double rhs = d.sin_dist * L.f(w, normalized(d.direction));
                CHECK(std::abs(lhs - rhs) <= 1e-9);
                ++checked;
            }
        }
    }
    CHECK(checked > 500);
    // Sphere not inside span(K).
    auto a3 = C(Family::A, 3);
    auto L = ConvexSubcomplex::from_roots(a3, {IVec{1, -1, 0, 0}, IVec{-1, 1, 0, 0}});
    CHECK_THROWS_AS(ch_with_sphere(L, {IVec{3, -1, -1, -1}}), DomainError);
}

TEST_CASE("radii") {
    auto a2 = C(Family::A, 2);
    Vec y{1, 0, -1};
    CHECK(circumradius_at(std::vector<Vec>{y}, y) == 0.0);
    IVec al{1, 0, -1};
    auto K = ConvexSubcomplex::from_roots(a2, {al});
    CHECK(circumradius_at(K, to_double(al)) == doctest::Approx(M_PI / 2));
    CHECK(inradius_at(K, to_double(al)) == doctest::Approx(M_PI / 2));
    auto ch = ConvexSubcomplex::hull_of_vertices(a2, a2->chambers[0]);
    Vec m(3, 0.0);
    for (int v : ch.vertices()) {
        Vec u = normalized(to_double(a2->vertices[v]));
        for (int i = 0; i < 3; ++i) m[i] += u[i];
    }
    CHECK(circumradius_at(ch, m) == doctest::Approx(M_PI / 6));
    CHECK(inradius_at(ConvexSubcomplex::whole(a2), m) == doctest::Approx(M_PI));
}

TEST_CASE("projection comparison") {
    Rng rng(8);
    for (auto [f, n] : {std::pair{Family::D, 4}, {Family::B, 3}, {Family::BC, 3}, {Family::C, 3}}) {
        auto cx = C(f, n);
        for (int mu : {1, 2}) {
            if (f != Family::BC && mu == 2) continue;
            auto w = WeightAssignment::standard(cx->rs, mu);
            int hyp = 0;
            for (int t = 0; t < 300; ++t) {
                Vec x(cx->ambient_dim());
                for (auto& c : x) c = rng.normal();
                x = normalized(x);
                for (std::size_t a = 0; a < cx->rs.roots.size(); ++a)
                    for (std::size_t b = 0; b < cx->rs.roots.size(); ++b) {
                        auto pc = projection_comparison(*cx, w, x, static_cast<int>(a), static_cast<int>(b));
                        if (!pc.hypothesis) continue;
                        ++hyp;
                        CHECK(pc.lhs >= pc.rhs - 1e-12);
                    }
            }
            CHECK(hyp > 1000);
        }
    }
}

TEST_CASE("weights") {
    auto bc = C(Family::BC, 3);
    auto w = WeightAssignment::standard(bc->rs);
    const int s = bc->rs.index_of({1, 0, 0}), l = bc->rs.index_of({2, 0, 0}), m = bc->rs.index_of({1, 1, 0});
    CHECK(w.mu_sq(s) == 1);
    CHECK(w.mu_sq(l) == 1);
    CHECK(w.mu_sq(m) == 2);
    w.choose(bc->rs, l, 2);
    CHECK(w.mu_sq(s) == 4);
    CHECK(w.mu_sq(l) == 4);
    CHECK_THROWS_AS(w.choose(bc->rs, m, 2), DomainError);
    auto b3 = C(Family::B, 3);
    auto wb = WeightAssignment::standard(b3->rs);
    CHECK(wb.mu_sq(b3->rs.index_of({1, 1, 0})) == 2);
    CHECK(wb.mu_sq(b3->rs.index_of({0, 0, -1})) == 1);
    // Normals mu x_alpha for alpha and 2 alpha coincide.
    CHECK(w.normal_scale_sq(bc->rs, s) * 1 == w.normal_scale_sq(bc->rs, l) * 4);
}

TEST_CASE("subcomplex export and import") {
    Rng rng(1);
    for (auto [f, n] : {std::pair{Family::A, 3}, {Family::D, 4}, {Family::BC, 3}}) {
        auto cx = C(f, n);
        for (int t = 0; t < 10; ++t) {
            auto K = random_chamber_subcomplex(cx, rng, 4);
            auto K2 = import_subcomplex(K.export_text());
            CHECK(K2.vertices() == K.vertices());
            CHECK(K2.lambda_min() == K.lambda_min());
            CHECK(K2.export_text() == K.export_text());
        }
    }
    CHECK_THROWS_AS(import_subcomplex("{not json"), DomainError);
    CHECK_THROWS_AS(import_subcomplex(R"({"format":"other","version":1})"), DomainError);
}

TEST_CASE("vertex restriction lemma in positive codimension") {
    int valid = 0;
    for (auto [f, n] : {std::pair{Family::B, 3}, {Family::D, 4}}) {
        auto cx = C(f, n);
        Rng rng(f == Family::B ? 31 : 41);
        for (int t = 0; t < 4000 && valid < 400; ++t) {
            auto inst = sample_poscodim(cx, rng);
            auto v = check_poscodim(inst);
            if (!v.hypotheses) continue;
            ++valid;
            CHECK_MESSAGE(v.conclusion, poscodim_to_json(inst));
            auto back = poscodim_from_json(poscodim_to_json(inst));
            CHECK(poscodim_to_json(back) == poscodim_to_json(inst));
        }
    }
    MESSAGE("valid configurations: " << valid);
    CHECK(valid >= 100);
}
