#pragma once

#include "buildinglab/common.hpp"
#include "buildinglab/coxgeom.hpp"
#include "buildinglab/exact.hpp"
#include "buildinglab/incenter.hpp"
#include "buildinglab/rng.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

// Type A_{n-1} buildings as flag complexes of F_q^n for small primes q.
namespace bl::bld {

// Dense matrices over F_q with entries in [0, q). Vectors are rows; a matrix
// acts on column vectors, so g maps the row v to (g v^T)^T.
using Row = std::vector<int>;
using Mat = std::vector<Row>;

int mod_inv(int a, int q);
Mat identity(int n);
Mat mul(const Mat& a, const Mat& b, int q);
Mat inverse(const Mat& a, int q);  // throws DomainError when singular
Row apply(const Mat& g, const Row& v, int q);
// Reduced row echelon form with zero rows removed.
Mat rref(Mat m, int q);
int rank(const Mat& m, int q);
Mat intersect(const Mat& u, const Mat& w, int q);
Mat sum(const Mat& u, const Mat& w, int q);
bool is_unipotent(const Mat& g, int q);  // (g - 1)^n = 0
std::string mat_str(const Mat& m);

inline constexpr std::size_t kFlagGuard = 1'000'000;

// A flag is a strictly increasing chain of subspace ids (ids order by
// dimension first), i.e. a face of the building. Frames are sorted line ids.
using Flag = std::vector<int>;
using Frame = std::vector<int>;

class Building {
public:
    // Memoized; q must be one of 2, 3, 5, 7 and n >= 2.
    static std::shared_ptr<const Building> build(int n, int q);

    int n() const { return n_; }
    int q() const { return q_; }
    int size() const { return static_cast<int>(basis_.size()); }  // proper subspaces
    const Mat& basis(int id) const { return basis_[id]; }          // RREF rows
    int dim(int id) const { return dim_[id]; }
    const std::vector<int>& of_dim(int d) const { return by_dim_[d]; }
    const std::vector<int>& lines_in(int id) const { return lines_in_[id]; }
    const std::vector<int>& covers(int id) const { return up_[id]; }  // dim + 1 superspaces
    // Id of span(rows); -1 for the zero space, -2 for the whole space.
    int find(const Mat& rows) const;
    bool contains(int big, int small) const;
    // Subspace ids moved by g: result[id] = id of g * V_id.
    std::vector<int> action(const Mat& g) const;

    bool is_flag(const Flag& f) const;
    Flag apply(const Mat& g, const Flag& f) const;
    std::vector<int> type_of(const Flag& f) const;
    Mat flag_matrix(const Flag& f) const;  // for reporting only

    // Cached A_{n-1} Coxeter complex used by all charts.
    cox::ComplexPtr coxeter() const { return cx_; }
    // All frames, enumerated on first use.
    const std::vector<Frame>& frames() const;

private:
    int n_ = 0, q_ = 0;
    std::vector<Mat> basis_;
    std::vector<int> dim_;
    std::vector<std::vector<int>> by_dim_;
    std::vector<std::vector<int>> lines_in_;
    std::vector<std::vector<int>> up_;
    std::unordered_map<std::string, int> index_;
    cox::ComplexPtr cx_;
    mutable std::once_flag frames_once_;
    mutable std::vector<Frame> frames_;
};
using BuildingPtr = std::shared_ptr<const Building>;

// All flags whose dimension set is `type` (ascending, values in 1..n-1).
std::vector<Flag> enum_flags(const Building& b, const std::vector<int>& type,
                             std::size_t guard = kFlagGuard);
std::vector<Flag> enum_chambers(const Building& b, std::size_t guard = kFlagGuard);
// Every nonempty flag, ordered by length then lexicographically.
std::vector<Flag> enum_faces(const Building& b, std::size_t guard = kFlagGuard);
std::vector<Frame> enum_frames(const Building& b, std::size_t guard = kFlagGuard);
// Closed-form counts used to validate enumerations and caches.
BigInt count_flags(int n, int q, const std::vector<int>& type);
BigInt count_frames(int n, int q);

// Disk caches keyed by (n, q, type); an empty cache_dir disables caching.
std::vector<Flag> enum_flags_cached(const Building& b, const std::vector<int>& type,
                                    const std::string& cache_dir);
std::vector<Frame> enum_frames_cached(const Building& b, const std::string& cache_dir);

// Apartment chart: frame lines in a chosen order, line i <-> coordinate i of
// the A_{n-1} model. The subspace spanned by the lines in S maps to the
// vertex n*1_S - |S|*1.
class ApartmentChart {
public:
    ApartmentChart(BuildingPtr b, std::vector<int> ordered_lines);
    const std::vector<int>& lines() const { return lines_; }
    const Building& building() const { return *b_; }
    BuildingPtr building_ptr() const { return b_; }
    Frame frame() const;
    // Columns are the frame vectors in chart order.
    const Mat& basis_matrix() const { return p_; }
    std::optional<unsigned> subset_of(int subspace) const;  // empty when not in the apartment
    int subspace_of(unsigned subset) const;
    bool contains(const Flag& f) const;
    IVec vertex(int subspace) const;  // throws when outside the apartment
    int cox_vertex(int subspace) const;
    std::vector<Flag> faces() const;
    std::vector<Flag> chambers() const;

private:
    BuildingPtr b_;
    std::vector<int> lines_;
    Mat p_;
    std::vector<int> subset_to_id_;
};

// Basis adapted to both flags from the common refinement of their
// filtrations; deterministic.
Frame common_apartment(const Building& b, const Flag& f1, const Flag& f2);
// All frames whose apartment contains both flags, up to `limit`.
std::vector<Frame> common_frames(const Building& b, const Flag& f1, const Flag& f2,
                                 std::size_t limit = kFlagGuard);
bool frame_contains(const Building& b, const Frame& fr, const Flag& f);

// A point of the building: nonnegative weights on the model vertex vectors
// of a face (positive weights give the relative interior).
struct Point {
    Flag face;
    std::vector<Rational> weights;
};
Point vertex_point(int subspace);
Point barycenter(const Flag& f);
QVec chart_coords(const ApartmentChart& c, const Point& p);
// Carrier face and weights of a chart point.
Point point_from_chart(const ApartmentChart& c, const QVec& x);
Point point_from_chart(const ApartmentChart& c, const Vec& x, double tol = 1e-12);

double building_distance(BuildingPtr b, const Point& p1, const Point& p2,
                         const Frame* frame = nullptr);
ExactScalar building_cos(BuildingPtr b, const Point& p1, const Point& p2,
                         const Frame* frame = nullptr);

// Fixed point set of a type-preserving group element, stored as its fixed
// vertex set and the full list of fixed flags.
class FixedPointSet {
public:
    static FixedPointSet of(BuildingPtr b, const Mat& g);
    static FixedPointSet from_vertices(BuildingPtr b, std::vector<char> vertex_mask);
    const Building& building() const { return *b_; }
    BuildingPtr building_ptr() const { return b_; }
    bool contains_vertex(int id) const { return mask_[id] != 0; }
    bool contains(const Flag& f) const;
    const std::vector<Flag>& faces() const { return faces_; }  // sorted
    std::vector<int> vertices() const;
    std::vector<Flag> chambers() const;
    int dim() const;  // -1 when empty
    bool empty() const { return faces_.empty(); }
    // Panels lying in exactly one chamber of the set.
    std::vector<Flag> boundary_panels() const;
    // Faces of boundary panels, sorted lexicographically.
    std::vector<Flag> boundary_faces() const;
    bool operator==(const FixedPointSet& o) const { return mask_ == o.mask_; }

private:
    BuildingPtr b_;
    std::vector<char> mask_;
    std::vector<Flag> faces_;
};
FixedPointSet fixed_faces(BuildingPtr b, const Mat& g);
FixedPointSet intersection(const FixedPointSet& a, const FixedPointSet& c);
std::vector<Flag> chambers_through(const Building& b, const Flag& panel);
std::string dump_fixed_set(const FixedPointSet& c, const Mat& g);

// U_sigma membership: g stabilizes every V_i and acts trivially on V_i/V_{i-1}.
bool chamber_membership(const Building& b, const Mat& g, const Flag& chamber);

// Transvection x_alpha(lambda) for alpha = e_a - e_b (chart indices, 0-based).
Mat root_group_element(const ApartmentChart& c, int a, int b, int lambda);

struct LeviSplit {
    Mat u, h;
    std::vector<int> ordered_lines;  // chart order in which g is upper triangular
};
// g = u h with u unipotent upper triangular and h diagonal in a frame basis
// whose standard chamber g fixes.
LeviSplit levi_split(BuildingPtr b, const Mat& g, const Frame& frame);

struct GalleryFactor {
    int a, b;    // root e_a - e_b in chart indices
    int lambda;  // g_i = x_alpha(lambda)
    Mat element;
};
// Reduced words use generators 1..n-1 (s_i swaps i and i+1, 1-based).
std::vector<GalleryFactor> gallery_coordinates(const ApartmentChart& c, const Mat& u,
                                               const std::vector<int>& word);
std::vector<std::vector<int>> reduced_words_w0(int n);

// Fix(g) inside an apartment as a convex subcomplex of the model complex.
cox::ConvexSubcomplex trace(const FixedPointSet& c, const ApartmentChart& chart);
// dim(C ∩ A) = dim C and the boundary faces of C ∩ A (taken inside A) are
// the boundary faces of C lying in A.
bool supports(const FixedPointSet& c, const ApartmentChart& chart);
bool supports(const FixedPointSet& c, const ApartmentChart& chart, const std::vector<Flag>& boundary_faces);

struct SubbuildingOptions {
    std::size_t guard = 20'000'000;
    bool prefilter = true;
};
bool subbuilding_test(const FixedPointSet& c, const SubbuildingOptions& opt = {});
// Necessary condition: every top face has an opposite face inside the set.
bool antipode_prefilter(const FixedPointSet& c);

enum class FixStatus { ok, subbuilding, no_supporting_apartment, no_negative_value };
std::string status_name(FixStatus s);

struct FixIncenterOptions {
    std::size_t all_apartments_limit = 10'000;
    int sampled_apartments = 50;
    std::uint64_t seed = 1;
};

struct FixIncenterResult {
    FixStatus status = FixStatus::ok;
    std::string detail;
    bool unipotent = false;
    Frame apartment;           // supporting apartment whose trace attains the minimum
    int supporting_apartments = 0;
    int minimizing_apartments = 0;  // traces attaining the minimum, all at the same point
    inc::IncenterResult incenter;
    Point point;               // incenter as a building point
    double radius = 0;         // max building distance to fixed vertices
    std::optional<ExactScalar> min_cos;  // exact cos of that distance when available
    // Independence certificate: f at fixed vertices over supporting apartments.
    int vertices_checked = 0;
    int evaluations = 0;
    bool exact_agreement = true;
    double max_discrepancy = 0;
};
FixIncenterResult fix_incenter(BuildingPtr b, const Mat& g, const FixIncenterOptions& opt = {});

struct CommutingWitness {
    Flag chamber;
    bool product_unipotent;
    bool invariance;  // each g_i fixes the other's incenter
    Point midpoint_face;
};
CommutingWitness commuting_unipotent_witness(BuildingPtr b, const Mat& g1, const Mat& g2);

bool jordan_fix_check(BuildingPtr b, const Mat& u, const Mat& k, const Frame& frame);

// Panels of Fix(g) off its boundary whose star is not entirely fixed.
std::vector<Flag> star_violations(const FixedPointSet& c);

// All invertible matrices, unipotent upper triangular matrices, and helpers
// for sampling.
std::vector<Mat> enum_gl(int n, int q, std::size_t guard = kFlagGuard);
std::vector<Mat> enum_unitriangular(int n, int q);
Mat random_invertible(int n, int q, Rng& rng);

bool ball_equality(BuildingPtr b, const ApartmentChart& c, int a, int bb, int lambda);

}  // namespace bl::bld
