#include "buildinglab/coxgeom.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <set>
#include <tuple>

namespace bl::cox {

using rootsys::RootSystem;

// ---------------------------------------------------------------- linear algebra

namespace {

long long gcd_all(const IVec& v) {
    long long g = 0;
    for (long long c : v) g = std::gcd(g, c < 0 ? -c : c);
    return g;
}

// Incremental integer echelon form; rows are kept primitive.
class Echelon {
public:
    // Returns true when v was independent of the rows so far (and adds it).
    bool add(IVec v) {
        reduce(v);
        auto it = std::find_if(v.begin(), v.end(), [](long long c) { return c != 0; });
        if (it == v.end()) return false;
        pivots_.push_back(static_cast<int>(it - v.begin()));
        rows_.push_back(std::move(v));
        return true;
    }
    bool contains(IVec v) const {
        reduce(v);
        return std::all_of(v.begin(), v.end(), [](long long c) { return c == 0; });
    }
    std::size_t rank() const { return rows_.size(); }

private:
    std::vector<IVec> rows_;
    std::vector<int> pivots_;
    void reduce(IVec& v) const {
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            long long c = v[pivots_[r]];
            if (c == 0) continue;
            long long p = rows_[r][pivots_[r]];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] * p - rows_[r][i] * c;
            long long g = gcd_all(v);
            if (g > 1)
                for (auto& x : v) x /= g;
        }
    }
};

// Solves G c = b over the rationals for nonsingular G (row pivoting).
QVec solve_rational(std::vector<QVec> G, QVec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && G[piv][col] == 0) ++piv;
        if (piv == n) throw DomainError("solve_rational: singular system");
        std::swap(G[piv], G[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || G[r][col] == 0) continue;
            Rational f = G[r][col] / G[col][col];
            for (std::size_t c = col; c < n; ++c) G[r][c] -= f * G[col][c];
            b[r] -= f * b[col];
        }
    }
    QVec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / G[i][i];
    return x;
}

std::vector<Vec> orthonormalize(const std::vector<IVec>& basis) {
    std::vector<Vec> out;
    for (const auto& b : basis) {
        Vec v = to_double(b);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : out) {
                double c = dot(v, u);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
            }
        out.push_back(normalized(v));
    }
    return out;
}

}  // namespace

QVec solve_linear(std::vector<QVec> A, QVec b) { return solve_rational(std::move(A), std::move(b)); }

std::vector<Vec> orthonormal_basis(const std::vector<IVec>& basis) { return orthonormalize(basis); }

int rank_of(const std::vector<IVec>& rows) {
    Echelon e;
    for (const auto& r : rows) e.add(r);
    return static_cast<int>(e.rank());
}

bool in_span(const std::vector<IVec>& basis, const IVec& v) {
    Echelon e;
    for (const auto& r : basis) e.add(r);
    return e.contains(v);
}

// ---------------------------------------------------------------- complex

std::shared_ptr<const CoxeterComplex> CoxeterComplex::build(Family family, int rank) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const CoxeterComplex>> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(static_cast<int>(family), rank);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    auto cx = std::make_shared<CoxeterComplex>();
    cx->rs = rootsys::build_root_system(family, rank);
    for (std::size_t i = 0; i < cx->rs.roots.size(); ++i)
        if (cx->rs.is_indivisible(i)) cx->hemisphere_roots.push_back(static_cast<int>(i));

    std::vector<IVec> models;
    for (int t = 1; t <= rank; ++t) models.push_back(rootsys::vertex_realization(cx->rs, t).coords);
    const auto weyl = rootsys::weyl_enumerate(cx->rs);
    std::set<IVec> vset;
    for (const auto& w : weyl)
        for (const auto& m : models) vset.insert(w.apply(m));
    cx->vertices.assign(vset.begin(), vset.end());
    for (const auto& v : cx->vertices) cx->vertex_types.push_back(rootsys::vertex_type(cx->rs, v));

    std::set<std::vector<int>> chambers;
    for (const auto& w : weyl) {
        std::vector<int> ch;
        for (const auto& m : models) ch.push_back(cx->find_vertex(w.apply(m)));
        chambers.insert(ch);
    }
    cx->chambers.assign(chambers.begin(), chambers.end());
    memo[key] = cx;
    return cx;
}

int CoxeterComplex::find_vertex(const IVec& v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    if (it == vertices.end() || *it != v) return -1;
    return static_cast<int>(it - vertices.begin());
}

// ---------------------------------------------------------------- weights

WeightAssignment WeightAssignment::standard(const RootSystem& rs, int bc_nonreduced_mu) {
    if (bc_nonreduced_mu != 1 && bc_nonreduced_mu != 2)
        throw DomainError("weight for a non-reduced root must be 1 or 2");
    WeightAssignment w;
    const int m = rs.min_squared_length();
    for (std::size_t i = 0; i < rs.roots.size(); ++i) {
        if (rs.family == Family::BC && rs.squared_length[i] != 2)
            w.mu_sq_.push_back(Rational(bc_nonreduced_mu * bc_nonreduced_mu));
        else
            w.mu_sq_.push_back(Rational(rs.squared_length[i], m));
    }
    return w;
}

void WeightAssignment::choose(const RootSystem& rs, int root_index, int mu) {
    if (rs.family != Family::BC || rs.squared_length[root_index] == 2)
        throw DomainError("weights of reduced roots are fixed to their norm");
    if (mu != 1 && mu != 2) throw DomainError("weight for a non-reduced root must be 1 or 2");
    IVec base = rs.roots[root_index];
    if (rs.squared_length[root_index] == 4)
        for (auto& c : base) c /= 2;
    IVec dbl = base;
    for (auto& c : dbl) c *= 2;
    mu_sq_[rs.index_of(base)] = mu * mu;
    mu_sq_[rs.index_of(dbl)] = mu * mu;
}

double WeightAssignment::mu(int root_index) const {
    return std::sqrt(mu_sq_[root_index].convert_to<double>());
}

Rational WeightAssignment::normal_scale_sq(const RootSystem& rs, int root_index) const {
    return mu_sq_[root_index] / Rational(rs.squared_length[root_index]);
}

// ---------------------------------------------------------------- subcomplexes

ConvexSubcomplex ConvexSubcomplex::from_roots(ComplexPtr cx, const std::vector<IVec>& hemispheres) {
    ConvexSubcomplex K;
    K.cx_ = std::move(cx);
    K.hemis_ = hemispheres;
    K.finish();
    return K;
}

ConvexSubcomplex ConvexSubcomplex::from_root_indices(ComplexPtr cx, const std::vector<int>& roots) {
    std::vector<IVec> h;
    for (int r : roots) h.push_back(cx->rs.roots[r]);
    return from_roots(std::move(cx), h);
}

ConvexSubcomplex ConvexSubcomplex::hull_of_vertices(ComplexPtr cx, const std::vector<int>& vertices) {
    if (vertices.empty()) throw DomainError("hull of an empty vertex set");
    std::vector<IVec> h;
    for (int r : cx->hemisphere_roots) {
        const IVec& a = cx->rs.roots[r];
        bool ok = std::all_of(vertices.begin(), vertices.end(),
                              [&](int v) { return dot(cx->vertices[v], a) >= 0; });
        if (ok) h.push_back(a);
    }
    return from_roots(std::move(cx), h);
}

ConvexSubcomplex ConvexSubcomplex::whole(ComplexPtr cx) { return from_roots(std::move(cx), {}); }

void ConvexSubcomplex::finish() {
    const auto& V = cx_->vertices;
    verts_.clear();
    for (std::size_t v = 0; v < V.size(); ++v) {
        bool in = std::all_of(hemis_.begin(), hemis_.end(),
                              [&](const IVec& h) { return dot(V[v], h) >= 0; });
        if (in) verts_.push_back(static_cast<int>(v));
    }
    if (verts_.empty()) throw DomainError("convex subcomplex is empty");
    Echelon e;
    basis_.clear();
    for (int v : verts_)
        if (e.add(V[v])) basis_.push_back(V[v]);
    ortho_ = orthonormalize(basis_);

    lambda_.clear();
    lambda_min_.clear();
    std::set<IVec> seen;
    for (int r : cx_->hemisphere_roots) {
        const IVec& a = cx_->rs.roots[r];
        bool all_nonneg = true, some_pos = false;
        for (int v : verts_) {
            long long d = dot(V[v], a);
            if (d < 0) {
                all_nonneg = false;
                break;
            }
            some_pos |= d > 0;
        }
        if (!all_nonneg || !some_pos) continue;
        IVec key;
        for (const auto& b : basis_) key.push_back(dot(b, a));
        long long g = gcd_all(key);
        for (auto& c : key) c /= g;
        if (!seen.insert(key).second) continue;
        lambda_.push_back(r);
        std::vector<IVec> zero;
        for (int v : verts_)
            if (dot(V[v], a) == 0) zero.push_back(V[v]);
        if (rank_of(zero) == static_cast<int>(basis_.size()) - 1) lambda_min_.push_back(r);
    }
}

bool ConvexSubcomplex::contains_vertex(int v) const {
    return std::binary_search(verts_.begin(), verts_.end(), v);
}

bool ConvexSubcomplex::contains(const Vec& x, double tol) const {
    const double nx = norm(x);
    if (nx == 0) return false;
    Vec r = x;
    for (const auto& u : ortho_) {
        double c = dot(x, u);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * u[i];
    }
    if (norm(r) > 1e-9 * nx) return false;
    const auto& rs = cx_->rs;
    for (int a : lambda_min_) {
        Vec av = to_double(rs.roots[a]);
        if (dot(x, av) / (nx * norm(av)) < -tol) return false;
    }
    return true;
}

bool ConvexSubcomplex::contains_exact(const QVec& x) const {
    // x in span(K): orthogonal residual vanishes.
    std::vector<QVec> G(basis_.size(), QVec(basis_.size()));
    QVec b(basis_.size());
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        for (std::size_t j = 0; j < basis_.size(); ++j) G[i][j] = Rational(dot(basis_[i], basis_[j]));
        b[i] = dot(to_rational(basis_[i]), x);
    }
    QVec c = solve_rational(G, b);
    QVec r = x;
    for (std::size_t i = 0; i < basis_.size(); ++i)
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= c[i] * basis_[i][k];
    for (const auto& v : r)
        if (v != 0) return false;
    for (int a : lambda_min_)
        if (dot(to_rational(cx_->rs.roots[a]), x) < 0) return false;
    return true;
}

IVec ConvexSubcomplex::relative_interior_point() const {
    IVec p(cx_->ambient_dim(), 0);
    for (int v : verts_)
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += cx_->vertices[v][i];
    return p;
}

bool ConvexSubcomplex::has_min_restriction(const IVec& root) const {
    auto key = [&](const IVec& a) {
        IVec k;
        for (const auto& b : basis_) k.push_back(dot(b, a));
        long long g = gcd_all(k);
        if (g > 1)
            for (auto& c : k) c /= g;
        return k;
    };
    const IVec target = key(root);
    if (gcd_all(target) == 0) return false;
    return std::any_of(lambda_min_.begin(), lambda_min_.end(),
                       [&](int a) { return key(cx_->rs.roots[a]) == target; });
}

std::string ConvexSubcomplex::export_text() const {
    nlohmann::ordered_json j;
    j["format"] = "buildinglab-subcomplex";
    j["version"] = 1;
    j["family"] = rootsys::family_name(cx_->rs.family);
    j["rank"] = cx_->rank();
    j["hemispheres"] = hemis_;
    j["span_basis"] = basis_;
    return j.dump();
}

ConvexSubcomplex import_subcomplex(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("subcomplex import: ") + e.what());
    }
    if (j.value("format", "") != "buildinglab-subcomplex" || j.value("version", 0) != 1)
        throw DomainError("subcomplex import: unsupported format or version");
    auto cx = CoxeterComplex::build(rootsys::parse_family(j.at("family").get<std::string>()),
                                    j.at("rank").get<int>());
    return ConvexSubcomplex::from_roots(cx, j.at("hemispheres").get<std::vector<IVec>>());
}

// ---------------------------------------------------------------- distances

ExactScalar cos_dist(const QVec& x, const QVec& y) {
    return ExactScalar::ratio_sqrt(dot(x, y), dot(x, x) * dot(y, y));
}

double cos_dist(const Vec& x, const Vec& y) { return dot(x, y) / (norm(x) * norm(y)); }

// 2 atan2(|x^ - y^|, |x^ + y^|) stays accurate near 0 and pi, unlike arccos.
double dist(const Vec& x, const Vec& y) {
    const Vec a = normalized(x), b = normalized(y);
    double dm = 0, dp = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dm += (a[i] - b[i]) * (a[i] - b[i]);
        dp += (a[i] + b[i]) * (a[i] + b[i]);
    }
    return 2 * std::atan2(std::sqrt(dm), std::sqrt(dp));
}

double join_distance(const std::vector<double>& a, const std::vector<double>& a2,
                     const std::vector<double>& d) {
    if (a.size() != a2.size() || a.size() != d.size())
        throw DomainError("join_distance: block count mismatch");
    // Each factor pair sits on its own circle at angle d_i.
    Vec p(2 * a.size(), 0.0), q(2 * a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || a2[i] < 0) throw DomainError("join_distance: negative weight");
        p[2 * i] = a[i];
        q[2 * i] = a2[i] * std::cos(d[i]);
        q[2 * i + 1] = a2[i] * std::sin(d[i]);
    }
    return dist(p, q);
}

std::vector<Face> enumerate_faces(const CoxeterComplex& cx, std::size_t guard) {
    const int n = cx.rank();
    const std::size_t est = cx.chambers.size() * ((std::size_t{1} << n) - 1);
    if (est > guard) throw GuardError("face enumeration exceeds guard");
    std::set<std::vector<int>> faces;
    for (const auto& ch : cx.chambers)
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<int> f;
            for (int t = 0; t < n; ++t)
                if (mask >> t & 1u) f.push_back(ch[t]);
            faces.insert(f);
        }
    std::vector<Face> out;
    for (const auto& f : faces) {
        Face face{f, {}};
        for (int v : f) face.types.push_back(cx.vertex_types[v]);
        out.push_back(face);
    }
    std::stable_sort(out.begin(), out.end(), [](const Face& a, const Face& b) {
        return a.vertices.size() < b.vertices.size();
    });
    return out;
}

// ---------------------------------------------------------------- f_K

ExactScalar incidence_value(const CoxeterComplex& cx, const WeightAssignment& w, const QVec& v,
                            int root_index) {
    Rational c2 = w.normal_scale_sq(cx.rs, root_index);
    Rational ip = dot(v, to_rational(cx.rs.roots[root_index]));
    return ExactScalar::sqrt_of(c2 / dot(v, v)) * ip;
}

double incidence_value(const CoxeterComplex& cx, const WeightAssignment& w, const Vec& x,
                       int root_index) {
    double c = std::sqrt(w.normal_scale_sq(cx.rs, root_index).convert_to<double>());
    return c * dot(x, to_double(cx.rs.roots[root_index])) / norm(x);
}

namespace {

void require_top(const ConvexSubcomplex& K) {
    if (!K.is_top_dimensional())
        throw HypothesisError("f_K is defined for top-dimensional subcomplexes only");
}

}  // namespace

FEval f_K(const ConvexSubcomplex& K, const WeightAssignment& w, const Vec& x) {
    require_top(K);
    if (!K.contains(x)) throw HypothesisError("f_K: point outside K");
    if (K.is_whole_ambient()) return {0.0, 0.0, {}};
    const auto& cx = K.complex();
    std::vector<double> vals;
    double best = -INFINITY;
    for (int a : K.lambda_min()) {
        vals.push_back(-incidence_value(cx, w, x, a));
        best = std::max(best, vals.back());
    }
    double full = -INFINITY;
    for (int a : K.lambda_full()) full = std::max(full, -incidence_value(cx, w, x, a));
    FEval out{best, full, {}};
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] >= best - 1e-12) out.active.push_back(K.lambda_min()[i]);
    return out;
}

FExact f_K_exact(const ConvexSubcomplex& K, const WeightAssignment& w, const QVec& x) {
    require_top(K);
    if (!K.contains_exact(x)) throw HypothesisError("f_K: point outside K");
    if (K.is_whole_ambient()) return {ExactScalar(), ExactScalar(), {}};
    const auto& cx = K.complex();
    std::vector<ExactScalar> vals;
    for (int a : K.lambda_min()) vals.push_back(-incidence_value(cx, w, x, a));
    ExactScalar best = *std::max_element(vals.begin(), vals.end());
    ExactScalar full = best;
    for (int a : K.lambda_full()) full = std::max(full, -incidence_value(cx, w, x, a));
    FExact out{best, full, {}};
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] == best) out.active.push_back(K.lambda_min()[i]);
    return out;
}

ConvexSubcomplex top_dim_envelope(const ConvexSubcomplex& L) {
    const auto& cx = L.complex();
    const IVec p = L.relative_interior_point();
    std::vector<int> roots;
    for (int r : cx.hemisphere_roots) {
        const IVec& a = cx.rs.roots[r];
        if (dot(p, a) <= 0) continue;
        bool ok = std::all_of(L.vertices().begin(), L.vertices().end(),
                              [&](int v) { return dot(cx.vertices[v], a) >= 0; });
        if (ok) roots.push_back(r);
    }
    return ConvexSubcomplex::from_root_indices(L.complex_ptr(), roots);
}

ConvexSubcomplex envelope_of_path(ComplexPtr cx, const std::vector<IVec>& path) {
    if (path.size() < 2) throw DomainError("envelope_of_path: need at least two vertices");
    std::vector<int> roots;
    for (int r : cx->hemisphere_roots) {
        const IVec& a = cx->rs.roots[r];
        std::vector<long long> d;
        for (const auto& v : path) d.push_back(dot(v, a));
        bool ok = std::all_of(d.begin(), d.end(), [](long long x) { return x >= 0; });
        for (std::size_t i = 1; ok && i + 1 < d.size(); ++i) ok = d[i] > 0;
        for (std::size_t i = 0; ok && i + 1 < d.size(); ++i) ok = d[i] > 0 || d[i + 1] > 0;
        if (ok) roots.push_back(r);
    }
    return ConvexSubcomplex::from_root_indices(cx, roots);
}

DnExample dn_example() {
    auto cx = CoxeterComplex::build(Family::D, 4);
    std::vector<IVec> c1{{-1, -1, 0, 0}, {-1, -1, 1, 1}, {0, 0, 1, 1}, {1, 1, 1, 1}, {1, 1, 0, 0}};
    std::vector<IVec> c2{{-1, -1, 1, 1}, {0, 0, 1, 1}, {1, 1, 1, 1}};
    auto K1 = envelope_of_path(cx, c1);
    auto K2 = envelope_of_path(cx, c2);
    auto w = WeightAssignment::standard(cx->rs);
    QVec x = to_rational(IVec{0, 0, 1, 1});
    auto f1 = f_K_exact(K1, w, x);
    auto f2 = f_K_exact(K2, w, x);
    return {c1, c2, x, K1, K2, f1, f2};
}

// ---------------------------------------------------------------- lambda tables

ExactScalar lambda_table(Family family, int rank, int index) {
    const int n = rank;
    if (index < 1 || index > n) throw DomainError("lambda_table: index out of range");
    if (family == Family::A) {
        const int k = index;
        return ExactScalar::sqrt_of(Rational(n + 1, 2 * k * (n + 1 - k)));
    }
    if (family == Family::D) {
        const int i = index == 2 ? 1 : index;
        return ExactScalar::sqrt_of(Rational(1, 2 * (n + 1 - i)));
    }
    // B/C/BC: lambda_i = c / |v_i| with v_i the 0/1 model vertex of type i
    // (|v_i|^2 = n+1-i) and c the smallest incidence <v, mu x_alpha> over all
    // vertices v and roots alpha with v strictly inside alpha.
    static std::mutex mu;
    static std::map<std::pair<int, int>, ExactScalar> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(static_cast<int>(family), rank);
    auto it = memo.find(key);
    if (it == memo.end()) {
        auto cx = CoxeterComplex::build(family, rank);
        auto w = WeightAssignment::standard(cx->rs);
        std::optional<ExactScalar> best;
        for (const auto& v : cx->vertices)
            for (int r : cx->hemisphere_roots) {
                const long long ip = dot(v, cx->rs.roots[r]);
                if (ip <= 0) continue;
                ExactScalar val = ExactScalar::sqrt_of(w.normal_scale_sq(cx->rs, r)) * Rational(ip);
                if (!best || val < *best) best = val;
            }
        it = memo.emplace(key, *best).first;
    }
    return it->second / ExactScalar::sqrt_of(Rational(n + 1 - index));
}

// ---------------------------------------------------------------- links

LinkDirection link_direction(const std::vector<IVec>& s_basis, const QVec& y) {
    const std::size_t k = s_basis.size();
    QVec proj(y.size(), Rational(0));
    if (k > 0) {
        std::vector<QVec> G(k, QVec(k));
        QVec b(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) G[i][j] = Rational(dot(s_basis[i], s_basis[j]));
            b[i] = dot(to_rational(s_basis[i]), y);
        }
        QVec c = solve_rational(G, b);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t t = 0; t < y.size(); ++t) proj[t] += c[i] * s_basis[i][t];
    }
    QVec dir(y.size());
    bool zero = true;
    for (std::size_t t = 0; t < y.size(); ++t) {
        dir[t] = y[t] - proj[t];
        zero &= dir[t] == 0;
    }
    if (zero) throw DomainError("link_direction: point lies in span(s)");
    return {dir, ExactScalar::sqrt_of(dot(dir, dir) / dot(y, y))};
}

LinkDirectionF link_direction(const std::vector<IVec>& s_basis, const Vec& y) {
    Vec dir = y;
    for (const auto& u : orthonormalize(s_basis)) {
        double c = dot(y, u);
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] -= c * u[i];
    }
    double nd = norm(dir), ny = norm(y);
    if (nd <= 1e-12 * ny) throw DomainError("link_direction: point lies in span(s)");
    return {dir, nd / ny};
}

double LinkSubcomplex::f(const WeightAssignment& w, const Vec& xi) const {
    double best = 0;
    bool any = false;
    for (int a : induced_roots) {
        double v = -incidence_value(*cx, w, xi, a);
        best = any ? std::max(best, v) : v;
        any = true;
    }
    return best;
}

bool LinkSubcomplex::contains(const Vec& xi, double tol) const {
    for (int a : induced_roots) {
        Vec av = to_double(cx->rs.roots[a]);
        if (dot(xi, av) / (norm(xi) * norm(av)) < -tol) return false;
    }
    return true;
}

namespace {

std::vector<int> roots_with_wall_through(const ConvexSubcomplex& K, const std::vector<IVec>& s) {
    for (const auto& b : s)
        if (!in_span(K.span_basis(), b))
            throw DomainError("singular sphere is not contained in the ambient sphere of K");
    std::vector<int> out;
    for (int a : K.lambda_min()) {
        const IVec& av = K.complex().rs.roots[a];
        if (std::all_of(s.begin(), s.end(), [&](const IVec& b) { return dot(b, av) == 0; }))
            out.push_back(a);
    }
    return out;
}

}  // namespace

LinkSubcomplex link_subcomplex(const ConvexSubcomplex& K, const std::vector<IVec>& s_basis) {
    return {K.complex_ptr(), s_basis, roots_with_wall_through(K, s_basis)};
}

ConvexSubcomplex ch_with_sphere(const ConvexSubcomplex& K, const std::vector<IVec>& s_basis) {
    return ConvexSubcomplex::from_root_indices(K.complex_ptr(), roots_with_wall_through(K, s_basis));
}

// ---------------------------------------------------------------- radii

double circumradius_at(const std::vector<Vec>& points, const Vec& y) {
    double r = 0;
    for (const auto& p : points) r = std::max(r, dist(p, y));
    return r;
}

double circumradius_at(const ConvexSubcomplex& K, const Vec& y) {
    std::vector<Vec> pts;
    for (int v : K.vertices()) pts.push_back(to_double(K.complex().vertices[v]));
    return circumradius_at(pts, y);
}

double inradius_at(const ConvexSubcomplex& K, const Vec& y) {
    if (K.lambda_min().empty()) return M_PI;
    double r = M_PI;
    for (int a : K.lambda_min()) {
        Vec av = to_double(K.complex().rs.roots[a]);
        r = std::min(r, std::asin(std::clamp(cos_dist(y, av), -1.0, 1.0)));
    }
    return r;
}

double sin_dist_to_wall(const Vec& x, const IVec& alpha) {
    Vec a = to_double(alpha);
    double c = dot(x, a) / dot(a, a);
    Vec z = x;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= c * a[i];
    if (norm(z) <= 1e-15 * norm(x)) return 1.0;
    return std::sin(dist(x, z));
}

ProjectionComparison projection_comparison(const CoxeterComplex& cx, const WeightAssignment& w,
                                           const Vec& x, int alpha, int beta) {
    const Vec a = to_double(cx.rs.roots[alpha]);
    const Vec b = to_double(cx.rs.roots[beta]);
    const double nx = norm(x);
    ProjectionComparison out{false, w.mu(beta) * sin_dist_to_wall(x, cx.rs.roots[beta]),
                             w.mu(alpha) * sin_dist_to_wall(x, cx.rs.roots[alpha])};
    const double xa = dot(x, a) / (nx * norm(a)), xb = dot(x, b) / (nx * norm(b));
    if (xa < -kMemberTol || xb < -kMemberTol) return out;
    const bool pole = xb >= 1 - 1e-12;
    // d(x, alpha cap wall(beta)) >= d(x, -alpha cap wall(beta))
    const bool angle = dot(x, a) * dot(b, b) <= dot(x, b) * dot(a, b) + 1e-12 * nx * norm(a) * dot(b, b);
    out.hypothesis = pole || angle;
    return out;
}

// ---------------------------------------------------------------- positive codimension

ConvexSubcomplex restrict_to_sphere(const ConvexSubcomplex& K, const std::vector<IVec>& s_basis) {
    const auto& cx = K.complex();
    std::vector<IVec> h = K.hemispheres();
    for (int r : cx.hemisphere_roots) {
        const IVec& a = cx.rs.roots[r];
        if (std::all_of(s_basis.begin(), s_basis.end(), [&](const IVec& b) { return dot(b, a) == 0; }))
            h.push_back(a);
    }
    return ConvexSubcomplex::from_roots(K.complex_ptr(), h);
}

namespace {

bool strictly_inside(const ConvexSubcomplex& K, const IVec& p) {
    const auto& rs = K.complex().rs;
    return std::all_of(K.lambda_min().begin(), K.lambda_min().end(),
                       [&](int a) { return dot(p, rs.roots[a]) > 0; });
}

}  // namespace

PoscodimVerdict check_poscodim(const PoscodimInstance& inst) {
    PoscodimVerdict out{false, false, {}, {}, {}, {}};
    auto cx = CoxeterComplex::build(inst.family, inst.rank);
    auto w = WeightAssignment::standard(cx->rs);
    std::optional<ConvexSubcomplex> K1, K2, S1, S2;
    try {
        K1 = ConvexSubcomplex::from_root_indices(cx, inst.k1_roots);
        K2 = ConvexSubcomplex::from_root_indices(cx, inst.k2_roots);
        S1 = restrict_to_sphere(*K1, inst.s_basis);
        S2 = restrict_to_sphere(*K2, inst.s_basis);
    } catch (const DomainError&) {
        out.reason = "empty intersection";
        return out;
    }
    if (!K1->is_top_dimensional() || !K2->is_top_dimensional()) {
        out.reason = "K_i not top-dimensional";
        return out;
    }
    if (K1->is_whole_ambient() || K2->is_whole_ambient()) {
        out.reason = "K_i is the whole sphere";
        return out;
    }
    if (!strictly_inside(*K1, S1->relative_interior_point()) ||
        !strictly_inside(*K2, S2->relative_interior_point())) {
        out.reason = "interior of K_i cap s not in interior of K_i";
        return out;
    }
    for (int v : S2->vertices())
        if (!S1->contains_vertex(v)) {
            out.reason = "K2 cap s not contained in K1 cap s";
            return out;
        }
    if (!S2->contains_vertex(inst.vertex)) {
        out.reason = "x not a vertex of K2 cap s";
        return out;
    }
    const QVec x = to_rational(cx->vertices[inst.vertex]);
    FExact e1 = f_K_exact(*K1, w, x), e2 = f_K_exact(*K2, w, x);
    out.f1 = e1.value;
    out.f2 = e2.value;
    if (!(e2.value < e1.value)) {
        out.reason = "f_K2(x) < f_K1(x) fails";
        return out;
    }
    out.hypotheses = true;
    out.maximizing = e1.active;
    out.conclusion = true;
    for (int a : e1.active) {
        const IVec& av = cx->rs.roots[a];
        if (!S1->has_min_restriction(av) || !S2->has_min_restriction(av)) {
            out.conclusion = false;
            out.reason = "alpha cap s not minimal in both restrictions";
        }
    }
    return out;
}

PoscodimInstance sample_poscodim(ComplexPtr cx, Rng& rng) {
    PoscodimInstance inst{cx->rs.family, cx->rank(), 0, {}, {}, {}};
    const int v = rng.below_int(static_cast<int>(cx->vertices.size()));
    inst.vertex = v;
    const IVec& xv = cx->vertices[v];

    std::vector<const std::vector<int>*> through;
    for (const auto& ch : cx->chambers)
        if (std::find(ch.begin(), ch.end(), v) != ch.end()) through.push_back(&ch);
    const auto& ch = *through[rng.below(through.size())];
    inst.s_basis.push_back(xv);
    for (int u : ch)
        if (u != v && rng.below(3) == 0) inst.s_basis.push_back(cx->vertices[u]);

    auto w = WeightAssignment::standard(cx->rs);
    const QVec xq = to_rational(xv);
    std::vector<int> positive, doubled;
    ExactScalar lam = lambda_table(cx->rs.family, cx->rank(), cx->vertex_types[v]);
    for (int r : cx->hemisphere_roots) {
        if (dot(xv, cx->rs.roots[r]) <= 0) continue;
        positive.push_back(r);
        if (incidence_value(*cx, w, xq, r) == lam * Rational(2)) doubled.push_back(r);
    }
    auto pick = [&](std::vector<int> pool, int k) {
        rng.shuffle(pool);
        pool.resize(std::min<std::size_t>(pool.size(), k));
        std::sort(pool.begin(), pool.end());
        return pool;
    };
    inst.k1_roots = pick(positive, 1 + rng.below_int(4));
    if (doubled.empty() || rng.below(4) == 0)
        inst.k2_roots = pick(positive, 1 + rng.below_int(6));
    else
        inst.k2_roots = pick(doubled, 1 + rng.below_int(static_cast<int>(doubled.size())));
    return inst;
}

std::string poscodim_to_json(const PoscodimInstance& inst) {
    nlohmann::ordered_json j;
    j["family"] = rootsys::family_name(inst.family);
    j["rank"] = inst.rank;
    j["vertex"] = inst.vertex;
    j["s_basis"] = inst.s_basis;
    j["k1_roots"] = inst.k1_roots;
    j["k2_roots"] = inst.k2_roots;
    return j.dump();
}

PoscodimInstance poscodim_from_json(const std::string& text) {
    try {
        auto j = nlohmann::json::parse(text);
        return {rootsys::parse_family(j.at("family").get<std::string>()), j.at("rank").get<int>(),
                j.at("vertex").get<int>(), j.at("s_basis").get<std::vector<IVec>>(),
                j.at("k1_roots").get<std::vector<int>>(), j.at("k2_roots").get<std::vector<int>>()};
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("poscodim instance: ") + e.what());
    }
}

// ---------------------------------------------------------------- sampling

ConvexSubcomplex random_chamber_subcomplex(ComplexPtr cx, Rng& rng, int max_roots,
                                           std::vector<int>* chamber_out) {
    const auto& ch = cx->chambers[rng.below(cx->chambers.size())];
    IVec p(cx->ambient_dim(), 0);
    for (int v : ch)
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += cx->vertices[v][i];
    std::vector<int> positive;
    for (int r : cx->hemisphere_roots)
        if (dot(p, cx->rs.roots[r]) > 0) positive.push_back(r);
    rng.shuffle(positive);
    const int k = 1 + rng.below_int(max_roots);
    positive.resize(std::min<std::size_t>(positive.size(), k));
    std::sort(positive.begin(), positive.end());
    if (chamber_out) *chamber_out = ch;
    return ConvexSubcomplex::from_root_indices(cx, positive);
}

Vec random_point(const ConvexSubcomplex& K, Rng& rng) {
    const auto& cx = K.complex();
    Vec x(cx.ambient_dim(), 0.0);
    const double power = 1.0 + 3.0 * rng.uniform();
    for (int v : K.vertices()) {
        Vec u = normalized(to_double(cx.vertices[v]));
        double a = std::pow(rng.uniform(), power) + 1e-6;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * u[i];
    }
    return normalized(x);
}

}  // namespace bl::cox
