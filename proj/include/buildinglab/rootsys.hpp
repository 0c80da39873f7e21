#pragma once

#include "buildinglab/common.hpp"

#include <string>
#include <vector>

namespace bl::rootsys {

enum class Family { A, B, C, D, BC };

std::string family_name(Family f);
Family parse_family(const std::string& s);

struct RootSystem {
    Family family;
    int rank;
    int ambient_dim;
    std::vector<IVec> roots;          // lexicographically sorted
    std::vector<int> squared_length;  // parallel to roots
    std::vector<std::string> warnings;

    // For BC the vectors +-e_i are non-reduced (twice them is again a root).
    bool is_reduced(std::size_t i) const;
    // Indivisible roots, i.e. everything except the long roots +-2e_i of BC.
    bool is_indivisible(std::size_t i) const;
    int min_squared_length() const;
    int index_of(const IVec& v) const;  // -1 when absent
};

// Signed permutation: e_i -> sign[i] * e_{perm[i]}. Family A uses signs +1 only.
struct WeylElement {
    std::vector<int> perm;
    std::vector<int> sign;

    IVec apply(const IVec& x) const;
    QVec apply(const QVec& x) const;
    WeylElement compose(const WeylElement& o) const;  // (this o o)(x) = this(o(x))
    WeylElement inverse() const;
    bool operator==(const WeylElement&) const = default;
    auto operator<=>(const WeylElement&) const = default;
};

struct VertexVector {
    IVec coords;
    int type_index;  // Dynkin-style type; for family A this is the block size
    int block_size;  // family A only, 0 otherwise
};

inline constexpr std::size_t kWeylGuard = 1'000'000;

RootSystem build_root_system(Family family, int rank);
std::size_t weyl_order(Family family, int rank);
std::vector<WeylElement> weyl_enumerate(const RootSystem& rs, std::size_t guard = kWeylGuard);
WeylElement weyl_identity(const RootSystem& rs);

QVec reflect(const QVec& x, const IVec& alpha);
IVec reflect(const IVec& x, const IVec& alpha);  // requires an integral result

// Model vertex of the fundamental chamber. For family A the index is the
// block size k (1..n); otherwise the type i (1..n).
VertexVector vertex_realization(const RootSystem& rs, int index);
// Type of any vertex vector in the W-orbit of a model vertex; 0 if none.
int vertex_type(const RootSystem& rs, const IVec& v);

// W-orbits of the root list keyed by squared length (ascending).
std::vector<std::vector<int>> root_orbits(const RootSystem& rs);

// Versioned structured-text serialization of an enumerated Weyl group.
std::string serialize_weyl(const RootSystem& rs, const std::vector<WeylElement>& w);
std::vector<WeylElement> deserialize_weyl(const RootSystem& rs, const std::string& text);
// Loads from or stores to cache_dir; an empty cache_dir disables caching.
std::vector<WeylElement> weyl_enumerate_cached(const RootSystem& rs, const std::string& cache_dir);

}  // namespace bl::rootsys
