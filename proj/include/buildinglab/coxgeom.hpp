#pragma once

#include "buildinglab/common.hpp"
#include "buildinglab/exact.hpp"
#include "buildinglab/rng.hpp"
#include "buildinglab/rootsys.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bl::cox {

using rootsys::Family;

// Coxeter complex of a root system: vertices (integer model vectors and their
// W-images), chambers as vertex-index lists ordered by type, and the
// indivisible roots whose hemispheres are the singular hemispheres.
struct CoxeterComplex {
    rootsys::RootSystem rs;
    std::vector<int> hemisphere_roots;  // indices into rs.roots
    std::vector<IVec> vertices;         // sorted
    std::vector<int> vertex_types;
    std::vector<std::vector<int>> chambers;  // chambers[c][t-1] = vertex of type t

    static std::shared_ptr<const CoxeterComplex> build(Family family, int rank);
    int find_vertex(const IVec& v) const;  // -1 when absent
    int rank() const { return rs.rank; }
    int ambient_dim() const { return rs.ambient_dim; }
};
using ComplexPtr = std::shared_ptr<const CoxeterComplex>;

// Weights mu_alpha per root, stored as mu^2 with the short root normalized to 1.
class WeightAssignment {
public:
    static WeightAssignment standard(const rootsys::RootSystem& rs, int bc_nonreduced_mu = 1);
    // Only non-reduced roots (and their doubles) admit a choice mu in {1, 2}.
    void choose(const rootsys::RootSystem& rs, int root_index, int mu);
    const Rational& mu_sq(int root_index) const { return mu_sq_[root_index]; }
    double mu(int root_index) const;
    // (mu / |alpha|)^2: the squared scale taking alpha to mu * x_alpha.
    Rational normal_scale_sq(const rootsys::RootSystem& rs, int root_index) const;

private:
    std::vector<Rational> mu_sq_;
};

struct Face {
    std::vector<int> vertices;  // complex vertex indices, ordered by type
    std::vector<int> types;
};

// Convex subcomplex K = intersection of closed hemispheres {<x,h> >= 0}.
// The ambient singular sphere s is the span of K.
class ConvexSubcomplex {
public:
    static ConvexSubcomplex from_roots(ComplexPtr cx, const std::vector<IVec>& hemispheres);
    static ConvexSubcomplex from_root_indices(ComplexPtr cx, const std::vector<int>& roots);
    // Intersection of all hemispheres containing the given vertices.
    static ConvexSubcomplex hull_of_vertices(ComplexPtr cx, const std::vector<int>& vertices);
    static ConvexSubcomplex whole(ComplexPtr cx);

    const CoxeterComplex& complex() const { return *cx_; }
    ComplexPtr complex_ptr() const { return cx_; }
    const std::vector<IVec>& hemispheres() const { return hemis_; }
    const std::vector<int>& vertices() const { return verts_; }
    const std::vector<IVec>& span_basis() const { return basis_; }
    int dim() const { return static_cast<int>(basis_.size()) - 1; }
    bool is_top_dimensional() const { return static_cast<int>(basis_.size()) == cx_->rank(); }
    bool is_whole_ambient() const { return lambda_.empty(); }
    const std::vector<int>& lambda_full() const { return lambda_; }
    const std::vector<int>& lambda_min() const { return lambda_min_; }
    bool contains_vertex(int v) const;
    bool contains(const Vec& x, double tol = kMemberTol) const;
    bool contains_exact(const QVec& x) const;
    // Sum of all vertex vectors: a point of the relative interior.
    IVec relative_interior_point() const;
    // True when the hemisphere of `root` restricted to span(K) coincides with
    // the restriction of some member of Lambda_K^min.
    bool has_min_restriction(const IVec& root) const;
    std::string export_text() const;

private:
    ComplexPtr cx_;
    std::vector<IVec> hemis_;
    std::vector<int> verts_;
    std::vector<IVec> basis_;
    std::vector<Vec> ortho_;  // orthonormal basis of span(K)
    std::vector<int> lambda_;
    std::vector<int> lambda_min_;
    void finish();
};

ConvexSubcomplex import_subcomplex(const std::string& text);

// Rank of a set of integer vectors over the rationals.
int rank_of(const std::vector<IVec>& rows);
bool in_span(const std::vector<IVec>& basis, const IVec& v);
// Exact solve of A x = b for nonsingular A; DomainError when singular.
QVec solve_linear(std::vector<QVec> A, QVec b);
std::vector<Vec> orthonormal_basis(const std::vector<IVec>& basis);

ExactScalar cos_dist(const QVec& x, const QVec& y);
double cos_dist(const Vec& x, const Vec& y);
double dist(const Vec& x, const Vec& y);

// Spherical join distance: cos D = sum_i a_i a'_i cos d_i with a, a' unit
// vectors of non-negative weights.
double join_distance(const std::vector<double>& a, const std::vector<double>& a2,
                     const std::vector<double>& d);

std::vector<Face> enumerate_faces(const CoxeterComplex& cx, std::size_t guard = 2'000'000);

// <v^, mu_alpha x_alpha> for a vertex or rational point v.
ExactScalar incidence_value(const CoxeterComplex& cx, const WeightAssignment& w, const QVec& v,
                            int root_index);
double incidence_value(const CoxeterComplex& cx, const WeightAssignment& w, const Vec& x,
                       int root_index);

struct FEval {
    double value;       // max over Lambda_K^min
    double value_full;  // max over Lambda_K
    std::vector<int> active;  // roots of Lambda_K^min attaining the maximum (within 1e-12)
};
// f_K on a top-dimensional K; identically 0 when K is the whole sphere.
FEval f_K(const ConvexSubcomplex& K, const WeightAssignment& w, const Vec& x);

struct FExact {
    ExactScalar value;
    ExactScalar value_full;
    std::vector<int> active;
};
FExact f_K_exact(const ConvexSubcomplex& K, const WeightAssignment& w, const QVec& x);

// Smallest top-dimensional subcomplex whose interior contains the relative interior of L.
ConvexSubcomplex top_dim_envelope(const ConvexSubcomplex& L);

// Smallest top-dimensional subcomplex whose interior contains the interior of
// the polygonal path through the given vertices (consecutive ones adjacent).
ConvexSubcomplex envelope_of_path(ComplexPtr cx, const std::vector<IVec>& path);

// Two crossing segments in D_4 with vertex types 3,1,3,1,3 and 1,3,1 and
// common midpoint x; K_i is the envelope of segment i.
struct DnExample {
    std::vector<IVec> c1, c2;
    QVec x;
    ConvexSubcomplex K1, K2;
    FExact f1, f2;
};
DnExample dn_example();

ExactScalar lambda_table(Family family, int rank, int index);

struct LinkDirection {
    QVec direction;        // component of y orthogonal to span(s)
    ExactScalar sin_dist;  // sin d(y, s)
};
LinkDirection link_direction(const std::vector<IVec>& s_basis, const QVec& y);
struct LinkDirectionF {
    Vec direction;
    double sin_dist;
};
LinkDirectionF link_direction(const std::vector<IVec>& s_basis, const Vec& y);

// Sigma_s K: the subcomplex of the link of s cut out by the members of
// Lambda_K^min whose walls contain s, with weights carried over.
struct LinkSubcomplex {
    ComplexPtr cx;
    std::vector<IVec> s_basis;
    std::vector<int> induced_roots;
    double f(const WeightAssignment& w, const Vec& xi) const;
    bool contains(const Vec& xi, double tol = kMemberTol) const;
};
LinkSubcomplex link_subcomplex(const ConvexSubcomplex& K, const std::vector<IVec>& s_basis);
ConvexSubcomplex ch_with_sphere(const ConvexSubcomplex& K, const std::vector<IVec>& s_basis);

double circumradius_at(const std::vector<Vec>& points, const Vec& y);
double circumradius_at(const ConvexSubcomplex& K, const Vec& y);
double inradius_at(const ConvexSubcomplex& K, const Vec& y);

// sin of the distance from x to the wall of alpha, computed by projecting
// onto the wall rather than through the inner product with the center.
double sin_dist_to_wall(const Vec& x, const IVec& alpha);

struct ProjectionComparison {
    bool hypothesis;  // x in both roots and the lemma's angle criterion holds
    double lhs;       // mu_beta sin d(x, wall beta)
    double rhs;       // mu_alpha sin d(x, wall alpha)
};
ProjectionComparison projection_comparison(const CoxeterComplex& cx, const WeightAssignment& w,
                                           const Vec& x, int alpha, int beta);

// K cap s, where s is the singular sphere spanned by s_basis.
ConvexSubcomplex restrict_to_sphere(const ConvexSubcomplex& K, const std::vector<IVec>& s_basis);

// One configuration for the vertex restriction lemma in positive codimension:
// top-dimensional K1, K2 cut out by the listed roots, a singular sphere s
// spanned by a face through the vertex x.
struct PoscodimInstance {
    Family family;
    int rank;
    int vertex;  // complex vertex index of x
    std::vector<IVec> s_basis;
    std::vector<int> k1_roots, k2_roots;
};
struct PoscodimVerdict {
    bool hypotheses;  // all hypotheses hold (exactly)
    bool conclusion;  // every maximizing alpha restricts into both minimal sets
    std::string reason;  // first failed hypothesis or conclusion, empty otherwise
    ExactScalar f1, f2;
    std::vector<int> maximizing;  // alpha in Lambda_{K1}^min attaining f_{K1}(x)
};
PoscodimVerdict check_poscodim(const PoscodimInstance& inst);
PoscodimInstance sample_poscodim(ComplexPtr cx, Rng& rng);
std::string poscodim_to_json(const PoscodimInstance& inst);
PoscodimInstance poscodim_from_json(const std::string& text);

// Seeded samplers shared by tests and suites.
// A random chamber together with 1..max_roots random roots containing it.
ConvexSubcomplex random_chamber_subcomplex(ComplexPtr cx, Rng& rng, int max_roots,
                                           std::vector<int>* chamber_out = nullptr);
// Random positive combination of the unit vertex vectors of K (relative interior).
Vec random_point(const ConvexSubcomplex& K, Rng& rng);

}  // namespace bl::cox
