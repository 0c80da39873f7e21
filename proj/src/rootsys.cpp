#include "buildinglab/rootsys.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace bl::rootsys {

std::string family_name(Family f) {
    switch (f) {
        case Family::A: return "A";
        case Family::B: return "B";
        case Family::C: return "C";
        case Family::D: return "D";
        case Family::BC: return "BC";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "A") return Family::A;
    if (s == "B") return Family::B;
    if (s == "C") return Family::C;
    if (s == "D") return Family::D;
    if (s == "BC") return Family::BC;
    throw DomainError("unknown root system family: " + s);
}

bool RootSystem::is_reduced(std::size_t i) const {
    if (family != Family::BC) return true;
    return squared_length[i] != 1;
}

bool RootSystem::is_indivisible(std::size_t i) const {
    if (family != Family::BC) return true;
    return squared_length[i] != 4;
}

int RootSystem::min_squared_length() const {
    return *std::min_element(squared_length.begin(), squared_length.end());
}

int RootSystem::index_of(const IVec& v) const {
    auto it = std::lower_bound(roots.begin(), roots.end(), v);
    if (it == roots.end() || *it != v) return -1;
    return static_cast<int>(it - roots.begin());
}

namespace {

void check_rank(Family family, int rank, std::vector<std::string>& warnings) {
    int lo = 2, hi = 6;
    if (family == Family::A) hi = 7;
    if (family == Family::D) lo = 3;
    if (rank < lo || rank > hi)
        throw DomainError("unsupported rank " + std::to_string(rank) + " for family " +
                          family_name(family));
    if (family == Family::D && rank == 3)
        warnings.push_back("D_3 is isomorphic to A_3; type labels follow the D_n convention");
}

IVec unit(int dim, int i, long long s = 1) {
    IVec v(dim, 0);
    v[i] = s;
    return v;
}

}  // namespace

RootSystem build_root_system(Family family, int rank) {
    RootSystem rs{family, rank, family == Family::A ? rank + 1 : rank, {}, {}, {}};
    check_rank(family, rank, rs.warnings);
    const int m = rs.ambient_dim;
    std::set<IVec> roots;
    if (family == Family::A) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j) {
                    IVec v(m, 0);
                    v[i] = 1;
                    v[j] = -1;
                    roots.insert(v);
                }
    } else {
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                for (int si : {-1, 1})
                    for (int sj : {-1, 1}) {
                        IVec v(m, 0);
                        v[i] = si;
                        v[j] = sj;
                        roots.insert(v);
                    }
        for (int i = 0; i < m; ++i)
            for (int s : {-1, 1}) {
                if (family == Family::B || family == Family::BC) roots.insert(unit(m, i, s));
                if (family == Family::C || family == Family::BC) roots.insert(unit(m, i, 2 * s));
            }
    }
    rs.roots.assign(roots.begin(), roots.end());
    for (const auto& r : rs.roots) rs.squared_length.push_back(static_cast<int>(dot(r, r)));
    return rs;
}

std::size_t weyl_order(Family family, int rank) {
    std::size_t fact = 1;
    int n = family == Family::A ? rank + 1 : rank;
    for (int i = 2; i <= n; ++i) fact *= static_cast<std::size_t>(i);
    if (family == Family::A) return fact;
    std::size_t signs = std::size_t{1} << rank;
    if (family == Family::D) signs >>= 1;
    return signs * fact;
}

WeylElement weyl_identity(const RootSystem& rs) {
    WeylElement w;
    w.perm.resize(rs.ambient_dim);
    std::iota(w.perm.begin(), w.perm.end(), 0);
    w.sign.assign(rs.ambient_dim, 1);
    return w;
}

std::vector<WeylElement> weyl_enumerate(const RootSystem& rs, std::size_t guard) {
    std::size_t order = weyl_order(rs.family, rs.rank);
    if (order > guard)
        throw GuardError("Weyl group of order " + std::to_string(order) + " exceeds guard " +
                         std::to_string(guard));
    const int m = rs.ambient_dim;
    std::vector<WeylElement> out;
    out.reserve(order);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    const bool signed_perm = rs.family != Family::A;
    do {
        if (!signed_perm) {
            out.push_back({perm, std::vector<int>(m, 1)});
            continue;
        }
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
            if (rs.family == Family::D && (__builtin_popcount(mask) % 2) != 0) continue;
            std::vector<int> sign(m);
            for (int i = 0; i < m; ++i) sign[i] = (mask >> i) & 1u ? -1 : 1;
            out.push_back({perm, sign});
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::sort(out.begin(), out.end());
    return out;
}

IVec WeylElement::apply(const IVec& x) const {
    IVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[perm[i]] = sign[i] * x[i];
    return out;
}

QVec WeylElement::apply(const QVec& x) const {
    QVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[perm[i]] = Rational(sign[i]) * x[i];
    return out;
}

WeylElement WeylElement::compose(const WeylElement& o) const {
    WeylElement r;
    r.perm.resize(perm.size());
    r.sign.resize(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        r.perm[i] = perm[o.perm[i]];
        r.sign[i] = o.sign[i] * sign[o.perm[i]];
    }
    return r;
}

WeylElement WeylElement::inverse() const {
    WeylElement r;
    r.perm.resize(perm.size());
    r.sign.resize(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        r.perm[perm[i]] = static_cast<int>(i);
        r.sign[perm[i]] = sign[i];
    }
    return r;
}

QVec reflect(const QVec& x, const IVec& alpha) {
    Rational xa = 0, aa = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xa += x[i] * alpha[i];
        aa += Rational(alpha[i] * alpha[i]);
    }
    if (aa == 0) throw DomainError("reflect: zero root");
    Rational c = 2 * xa / aa;
    QVec out(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] -= c * alpha[i];
    return out;
}

IVec reflect(const IVec& x, const IVec& alpha) {
    const long long aa = dot(alpha, alpha);
    if (aa == 0) throw DomainError("reflect: zero root");
    const long long c2 = 2 * dot(x, alpha);
    IVec out(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        long long t = c2 * alpha[i];
        if (t % aa != 0) throw DomainError("reflect: non-integral result");
        out[i] -= t / aa;
    }
    return out;
}

VertexVector vertex_realization(const RootSystem& rs, int index) {
    const int n = rs.rank;
    if (index < 1 || index > n)
        throw DomainError("vertex index " + std::to_string(index) + " out of range 1.." +
                          std::to_string(n));
    VertexVector v{IVec(rs.ambient_dim, 0), index, 0};
    if (rs.family == Family::A) {
        const int k = index;
        for (int i = 0; i < n + 1; ++i) v.coords[i] = i < k ? (n + 1 - k) : -k;
        v.block_size = k;
        return v;
    }
    if (rs.family == Family::D && index == 2) {
        for (int i = 0; i < n; ++i) v.coords[i] = 1;
        v.coords[0] = -1;
        return v;
    }
    for (int i = index - 1; i < n; ++i) v.coords[i] = 1;
    return v;
}

int vertex_type(const RootSystem& rs, const IVec& v) {
    const int n = rs.rank;
    if (static_cast<int>(v.size()) != rs.ambient_dim) return 0;
    if (rs.family == Family::A) {
        int pos = 0;
        for (long long c : v) pos += c > 0;
        if (pos < 1 || pos > n) return 0;
        for (long long c : v)
            if (c != n + 1 - pos && c != -pos) return 0;
        return pos;
    }
    int nonzero = 0, minus = 0;
    for (long long c : v) {
        if (c != 0 && c != 1 && c != -1) return 0;
        nonzero += c != 0;
        minus += c < 0;
    }
    if (nonzero == 0) return 0;
    if (rs.family != Family::D) return n + 1 - nonzero;
    if (nonzero == n) return minus % 2 == 0 ? 1 : 2;
    if (nonzero == n - 1) return 0;
    return n + 1 - nonzero;
}

std::vector<std::vector<int>> root_orbits(const RootSystem& rs) {
    std::vector<int> orbit_of(rs.roots.size(), -1);
    std::vector<std::vector<int>> orbits;
    for (std::size_t start = 0; start < rs.roots.size(); ++start) {
        if (orbit_of[start] >= 0) continue;
        int id = static_cast<int>(orbits.size());
        orbits.emplace_back();
        std::vector<int> stack{static_cast<int>(start)};
        orbit_of[start] = id;
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            orbits[id].push_back(cur);
            for (const auto& a : rs.roots) {
                int j = rs.index_of(reflect(rs.roots[cur], a));
                if (j >= 0 && orbit_of[j] < 0) {
                    orbit_of[j] = id;
                    stack.push_back(j);
                }
            }
        }
        std::sort(orbits[id].begin(), orbits[id].end());
    }
    std::stable_sort(orbits.begin(), orbits.end(), [&](const auto& a, const auto& b) {
        return rs.squared_length[a.front()] < rs.squared_length[b.front()];
    });
    return orbits;
}

std::string serialize_weyl(const RootSystem& rs, const std::vector<WeylElement>& w) {
    std::ostringstream os;
    os << "buildinglab-weyl v1\n" << family_name(rs.family) << ' ' << rs.rank << ' ' << w.size()
       << '\n';
    for (const auto& e : w) {
        for (std::size_t i = 0; i < e.perm.size(); ++i) os << (i ? " " : "") << e.perm[i];
        os << " |";
        for (int s : e.sign) os << ' ' << s;
        os << '\n';
    }
    return os.str();
}

std::vector<WeylElement> deserialize_weyl(const RootSystem& rs, const std::string& text) {
    std::istringstream is(text);
    std::string header;
    std::getline(is, header);
    if (header != "buildinglab-weyl v1") throw CacheError("weyl cache: bad header");
    std::string fam;
    int rank = 0;
    std::size_t count = 0;
    if (!(is >> fam >> rank >> count)) throw CacheError("weyl cache: bad parameter line");
    if (fam != family_name(rs.family) || rank != rs.rank ||
        count != weyl_order(rs.family, rs.rank))
        throw CacheError("weyl cache: parameters do not match");
    std::vector<WeylElement> out(count);
    const int m = rs.ambient_dim;
    for (auto& e : out) {
        e.perm.resize(m);
        e.sign.resize(m);
        std::string bar;
        for (int i = 0; i < m; ++i)
            if (!(is >> e.perm[i])) throw CacheError("weyl cache: truncated");
        if (!(is >> bar) || bar != "|") throw CacheError("weyl cache: malformed row");
        for (int i = 0; i < m; ++i)
            if (!(is >> e.sign[i])) throw CacheError("weyl cache: truncated");
    }
    std::string extra;
    if (is >> extra) throw CacheError("weyl cache: trailing data");
    // A strictly increasing list of valid elements of the right size is the full group.
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& e = out[k];
        std::vector<int> seen(m, 0);
        int minus = 0;
        for (int i = 0; i < m; ++i) {
            if (e.perm[i] < 0 || e.perm[i] >= m || seen[e.perm[i]]++)
                throw CacheError("weyl cache: invalid permutation");
            if (e.sign[i] != 1 && e.sign[i] != -1) throw CacheError("weyl cache: invalid sign");
            minus += e.sign[i] < 0;
        }
        if ((rs.family == Family::A && minus != 0) || (rs.family == Family::D && minus % 2 != 0))
            throw CacheError("weyl cache: element outside the group");
        if (k > 0 && !(out[k - 1] < e)) throw CacheError("weyl cache: order violated");
    }
    return out;
}

std::vector<WeylElement> weyl_enumerate_cached(const RootSystem& rs, const std::string& cache_dir) {
    if (cache_dir.empty()) return weyl_enumerate(rs);
    namespace fs = std::filesystem;
    fs::path p = fs::path(cache_dir) /
                 ("weyl_" + family_name(rs.family) + std::to_string(rs.rank) + ".v1.txt");
    if (fs::exists(p)) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return deserialize_weyl(rs, ss.str());
    }
    auto w = weyl_enumerate(rs);
    fs::create_directories(cache_dir);
    std::ofstream(p) << serialize_weyl(rs, w);
    return w;
}

}  // namespace bl::rootsys
