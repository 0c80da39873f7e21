#include "buildinglab/incenter.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bl::inc {

namespace {

constexpr double kFeasTol = 1e-12;

// Affine minimum-norm point of the atoms in S: minimize |sum l_i a_i| with
// sum l_i = 1. Returns nothing when the atoms are affinely dependent.
std::optional<std::vector<double>> affine_min_norm(const std::vector<Vec>& atoms, const std::vector<int>& S) {
    const int k = static_cast<int>(S.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) M(i, j) = dot(atoms[S[i]], atoms[S[j]]);
        M(i, k) = M(k, i) = 1;
    }
    rhs(k) = 1;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-11);
    if (lu.rank() < k + 1) return std::nullopt;
    Eigen::VectorXd sol = lu.solve(rhs);
    return std::vector<double>(sol.data(), sol.data() + k);
}

Vec combine(const std::vector<Vec>& atoms, const std::vector<int>& S, const std::vector<double>& l) {
    Vec p(atoms.front().size(), 0.0);
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t t = 0; t < p.size(); ++t) p[t] += l[i] * atoms[S[i]][t];
    return p;
}

double scale_of(const std::vector<Vec>& atoms) {
    double m = 0;
    for (const auto& a : atoms) m = std::max(m, dot(a, a));
    return m;
}

bool is_optimal(const std::vector<Vec>& atoms, const Vec& p, double tol) {
    const double pp = dot(p, p);
    return std::all_of(atoms.begin(), atoms.end(), [&](const Vec& a) { return dot(p, a) >= pp - tol; });
}

int numeric_rank(const std::vector<Vec>& atoms) {
    Eigen::MatrixXd A(atoms.size(), atoms.front().size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = 0; j < atoms[i].size(); ++j) A(i, j) = atoms[i][j];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    return static_cast<int>(lu.rank());
}

}  // namespace

MinNorm min_norm_enumerate(const std::vector<Vec>& atoms) {
    if (atoms.empty()) throw DomainError("min_norm: no atoms");
    const int m = static_cast<int>(atoms.size());
    const int kmax = std::min(m, numeric_rank(atoms) + 1);
    const double tol = 1e-10 * scale_of(atoms);
    MinNorm out;
    for (int k = 1; k <= kmax; ++k) {
        std::vector<int> S(k);
        std::iota(S.begin(), S.end(), 0);
        while (true) {
            ++out.iterations;
            if (auto l = affine_min_norm(atoms, S)) {
                if (std::all_of(l->begin(), l->end(), [](double x) { return x >= -kFeasTol; })) {
                    Vec p = combine(atoms, S, *l);
                    if (is_optimal(atoms, p, tol)) {
                        out.point = p;
                        for (int i = 0; i < k; ++i)
                            if ((*l)[i] > kFeasTol) {
                                out.support.push_back(S[i]);
                                out.weights.push_back((*l)[i]);
                            }
                        return out;
                    }
                }
            }
            int i = k - 1;
            while (i >= 0 && S[i] == m - k + i) --i;
            if (i < 0) break;
            ++S[i];
            for (int j = i + 1; j < k; ++j) S[j] = S[j - 1] + 1;
        }
    }
    throw DomainError("min_norm: enumeration found no optimal support");
}

MinNorm min_norm_wolfe(const std::vector<Vec>& atoms, int max_iter) {
    if (atoms.empty()) throw DomainError("min_norm: no atoms");
    const double scale = scale_of(atoms);
    const double eps = 1e-12;
    std::vector<int> S;
    std::vector<double> lam;
    {
        int j = 0;
        for (std::size_t i = 1; i < atoms.size(); ++i)
            if (dot(atoms[i], atoms[i]) < dot(atoms[j], atoms[j])) j = static_cast<int>(i);
        S = {j};
        lam = {1.0};
    }
    Vec x = atoms[S[0]];
    MinNorm out;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        int j = 0;
        for (std::size_t i = 1; i < atoms.size(); ++i)
            if (dot(x, atoms[i]) < dot(x, atoms[j])) j = static_cast<int>(i);
        if (dot(x, atoms[j]) >= dot(x, x) - eps * scale) break;
        if (std::find(S.begin(), S.end(), j) != S.end()) break;
        S.push_back(j);
        lam.push_back(0.0);
        while (true) {
            auto a = affine_min_norm(atoms, S);
            if (!a) {
                // Affinely dependent after insertion: drop the smallest weight.
                auto k = std::min_element(lam.begin(), lam.end() - 1) - lam.begin();
                S.erase(S.begin() + k);
                lam.erase(lam.begin() + k);
                continue;
            }
            if (std::all_of(a->begin(), a->end(), [&](double v) { return v > eps; })) {
                lam = *a;
                x = combine(atoms, S, lam);
                break;
            }
            double theta = 1.0;
            for (std::size_t i = 0; i < S.size(); ++i)
                if ((*a)[i] <= eps) theta = std::min(theta, lam[i] / (lam[i] - (*a)[i]));
            for (std::size_t i = 0; i < S.size(); ++i) lam[i] = (1 - theta) * lam[i] + theta * (*a)[i];
            std::vector<int> S2;
            std::vector<double> l2;
            for (std::size_t i = 0; i < S.size(); ++i)
                if (lam[i] > eps) {
                    S2.push_back(S[i]);
                    l2.push_back(lam[i]);
                }
            S = S2;
            lam = l2;
            const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
            for (auto& v : lam) v /= total;
            x = combine(atoms, S, lam);
        }
    }
    out.point = x;
    out.support = S;
    out.weights = lam;
    return out;
}

// ---------------------------------------------------------------- incenter of K

namespace {

struct Normals {
    std::vector<int> roots;    // Lambda_K^min
    std::vector<Vec> atoms;    // mu_alpha x^_alpha
    std::vector<QVec> q;       // atoms = kappa * q, when every ratio is a rational square
    Rational kappa_sq;
    bool exact = true;
};

Normals normals_of(const ConvexSubcomplex& K, const WeightAssignment& w) {
    const auto& rs = K.complex().rs;
    Normals N;
    N.roots = K.lambda_min();
    for (std::size_t i = 0; i < N.roots.size(); ++i) {
        const int r = N.roots[i];
        const Rational c2 = w.normal_scale_sq(rs, r);
        const double c = std::sqrt(c2.convert_to<double>());
        Vec a = to_double(rs.roots[r]);
        for (auto& v : a) v *= c;
        N.atoms.push_back(a);
        if (i == 0) N.kappa_sq = c2;
        const ExactScalar ratio = ExactScalar::sqrt_of(c2 / N.kappa_sq);
        if (!ratio.is_rational()) N.exact = false;
        QVec qa = to_rational(rs.roots[r]);
        for (auto& v : qa) v *= ratio.coefficient();
        N.q.push_back(qa);
    }
    return N;
}

// Exact recomputation on a candidate support; fills the result on success.
bool certify(const Normals& N, const std::vector<int>& support, IncenterResult& res) {
    if (!N.exact || support.empty()) return false;
    const std::size_t k = support.size();
    std::vector<QVec> M(k + 1, QVec(k + 1, Rational(0)));
    QVec rhs(k + 1, Rational(0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) M[i][j] = dot(N.q[support[i]], N.q[support[j]]);
        M[i][k] = M[k][i] = 1;
    }
    rhs[k] = 1;
    QVec l;
    try {
        l = cox::solve_linear(M, rhs);
    } catch (const DomainError&) {
        return false;
    }
    QVec P(N.q.front().size(), Rational(0));
    for (std::size_t i = 0; i < k; ++i) {
        if (l[i] < 0) return false;
        for (std::size_t t = 0; t < P.size(); ++t) P[t] += l[i] * N.q[support[i]][t];
    }
    const Rational pp = dot(P, P);
    std::vector<int> active;
    for (std::size_t b = 0; b < N.q.size(); ++b) {
        const Rational ip = dot(P, N.q[b]);
        if (ip < pp) return false;
        if (ip == pp) active.push_back(N.roots[b]);
    }
    if (pp == 0) {
        res.status = Status::no_negative_value;
        res.exact_value = ExactScalar();
        return true;
    }
    res.exact_point = P;
    res.exact_value = -ExactScalar::sqrt_of(N.kappa_sq * pp);
    res.point = normalized(to_double(P));
    res.value = res.exact_value->to_double();
    std::sort(active.begin(), active.end());
    res.active_set = active;
    return true;
}

void finish(const ConvexSubcomplex& K, const WeightAssignment& w, const Normals& N, const MinNorm& mn,
            IncenterResult& res) {
    std::vector<int> support = mn.support;
    std::sort(support.begin(), support.end());
    res.iterations = mn.iterations;
    if (certify(N, support, res)) {
        if (res.status == Status::no_negative_value) return;
    } else {
        const double len = norm(mn.point);
        if (len < 1e-12) {
            res.status = Status::no_negative_value;
            return;
        }
        res.point = normalized(mn.point);
        res.value = -len;
        auto fe = cox::f_K(K, w, res.point);
        res.active_set = fe.active;
    }
    res.residual = std::abs(cox::f_K(K, w, res.point).value - res.value);
    res.radius_certificate = rad_certificate(K, res.point);
}

}  // namespace

IncenterResult minimize(const ConvexSubcomplex& K, const WeightAssignment& w) {
    if (!K.is_top_dimensional()) throw HypothesisError("minimize: K must be top-dimensional");
    IncenterResult res;
    if (K.lambda_min().empty()) {
        res.status = Status::no_negative_value;
        res.method = "none";
        return res;
    }
    const Normals N = normals_of(K, w);
    MinNorm mn;
    if (N.atoms.size() <= 12) {
        mn = min_norm_enumerate(N.atoms);
        res.method = "active-set";
    } else {
        mn = min_norm_wolfe(N.atoms);
        res.method = "wolfe";
    }
    finish(K, w, N, mn, res);
    return res;
}

IncenterResult minimize_from(const ConvexSubcomplex& K, const WeightAssignment& w, const Vec& start,
                             int max_iter) {
    if (!K.is_top_dimensional()) throw HypothesisError("minimize: K must be top-dimensional");
    IncenterResult res;
    res.method = "iterative";
    if (K.lambda_min().empty()) {
        res.status = Status::no_negative_value;
        return res;
    }
    const Normals N = normals_of(K, w);
    const auto basis = cox::orthonormal_basis(K.span_basis());
    auto project = [&](const Vec& v) {
        Vec p(v.size(), 0.0);
        for (const auto& u : basis) {
            const double c = dot(v, u);
            for (std::size_t i = 0; i < p.size(); ++i) p[i] += c * u[i];
        }
        return normalized(p);
    };
    Vec x = project(start);
    const double tol = 1e-10 * scale_of(N.atoms);
    for (int k = 1; k <= max_iter; ++k) {
        std::size_t j = 0;
        for (std::size_t i = 1; i < N.atoms.size(); ++i)
            if (dot(x, N.atoms[i]) < dot(x, N.atoms[j])) j = i;
        const double g = dot(x, N.atoms[j]);
        if (k % 50 == 0) {
            for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
                std::vector<int> near;
                std::vector<Vec> sub;
                for (std::size_t i = 0; i < N.atoms.size(); ++i)
                    if (dot(x, N.atoms[i]) <= g + delta) {
                        near.push_back(static_cast<int>(i));
                        sub.push_back(N.atoms[i]);
                    }
                MinNorm local = min_norm_enumerate(sub);
                if (!is_optimal(N.atoms, local.point, tol)) continue;
                for (auto& s : local.support) s = near[s];
                local.iterations = k;
                finish(K, w, N, local, res);
                return res;
            }
        }
        Vec s = N.atoms[j];
        const double c = dot(s, x);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] -= c * x[i];
        Vec y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += s[i] / k;
        x = project(y);
    }
    res.iterations = max_iter;
    auto fe = cox::f_K(K, w, x);
    res.point = x;
    res.value = fe.value;
    res.active_set = fe.active;
    res.residual = 0;
    res.radius_certificate = rad_certificate(K, x);
    if (res.value >= 0) res.status = Status::no_negative_value;
    return res;
}

PolytopeIncenter polytope_incenter(const std::vector<Vec>& normals) {
    std::vector<Vec> atoms;
    for (const auto& n : normals) atoms.push_back(normalized(n));
    MinNorm mn = atoms.size() <= 12 ? min_norm_enumerate(atoms) : min_norm_wolfe(atoms);
    const double len = norm(mn.point);
    if (len < 1e-12) return {true, {}, 0.0};
    return {false, normalized(mn.point), -len};
}

// ---------------------------------------------------------------- nicely convex

std::vector<Violation> check_nicely_convex(const Function& f, const Sampler& sample, int n_samples,
                                           Rng& rng, double tol) {
    std::vector<Violation> out;
    int done = 0, attempts = 0;
    while (done < n_samples && attempts < 4 * n_samples + 16) {
        ++attempts;
        const Vec x = normalized(sample(rng));
        const Vec y = rng.below(16) == 0 ? x : normalized(sample(rng));
        const double d = cox::dist(x, y);
        if (d >= M_PI - 1e-9) continue;
        ++done;
        Vec m(x.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = x[i] + y[i];
        m = normalized(m);
        const double fx = f(x), fy = f(y), fm = f(m);
        for (const auto& [p, v] : {std::pair{x, fx}, {y, fy}})
            if (v > tol) out.push_back({p, p, v, 0.0, "positive"});
        const double lhs = fx + fy, rhs = 2 * std::cos(d / 2) * fm;
        if (lhs < rhs - tol) out.push_back({x, y, lhs, rhs, "inequality"});
    }
    return out;
}

std::vector<Violation> check_nicely_convex(const ConvexSubcomplex& K, const WeightAssignment& w,
                                           int n_samples, Rng& rng, double tol) {
    return check_nicely_convex([&](const Vec& x) { return cox::f_K(K, w, x).value; },
                               [&](Rng& r) { return cox::random_point(K, r); }, n_samples, rng, tol);
}

// ---------------------------------------------------------------- g_n

namespace {

// h_n = g_n - 1 satisfies h_{n+1}(t) = 2 cos(t/2) h_n(t/2) - 4 sin^2(t/4),
// the same recursion without the cancellation in "... - 1".
double gn_minus_one(int n, double t) {
    if (n == 0) return 0.0;
    const double s = std::sin(t / 4);
    return 2 * std::cos(t / 2) * gn_minus_one(n - 1, t / 2) - 4 * s * s;
}

}  // namespace

double gn_recursion(int n, double t) {
    if (n < 0) throw DomainError("gn_recursion: negative n");
    return 1.0 + gn_minus_one(n, t);
}

double gn_bound(int n, double t) {
    const double s = std::sin(std::ldexp(t, -(n + 1)));
    return std::ldexp(2 * s * s, n);
}

double rad_certificate(const ConvexSubcomplex& K, const Vec& x0) { return cox::circumradius_at(K, x0); }

}  // namespace bl::inc
