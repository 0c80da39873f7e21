#include "buildinglab/building.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace bl::bld {

namespace {

int md(long long x, int q) { return static_cast<int>(((x % q) + q) % q); }

std::string key_of(const Mat& m) {
    std::string k;
    for (const auto& r : m) {
        for (int x : r) k.push_back(static_cast<char>('0' + x));
        k.push_back('|');
    }
    return k;
}

// Basis of {x : a x = 0} for a matrix with `cols` columns.
Mat nullspace(const Mat& a, int cols, int q) {
    const Mat r = rref(a, q);
    std::vector<int> pivot_of_col(cols, -1);
    for (std::size_t i = 0; i < r.size(); ++i)
        for (int c = 0; c < cols; ++c)
            if (r[i][c]) {
                pivot_of_col[c] = static_cast<int>(i);
                break;
            }
    Mat out;
    for (int f = 0; f < cols; ++f) {
        if (pivot_of_col[f] >= 0) continue;
        Row x(cols, 0);
        x[f] = 1;
        for (int c = 0; c < cols; ++c)
            if (pivot_of_col[c] >= 0) x[c] = md(-r[pivot_of_col[c]][f], q);
        out.push_back(x);
    }
    return out;
}

Mat transpose(const Mat& m, int cols) {
    Mat t(cols, Row(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int j = 0; j < cols; ++j) t[j][i] = m[i][j];
    return t;
}

Mat columns_to_mat(const std::vector<Row>& cols) {
    const std::size_t n = cols.size();
    Mat m(n, Row(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) m[i][j] = cols[j][i];
    return m;
}

bool in_span_rows(const Mat& basis, const Row& v, int q) {
    Mat m = basis;
    m.push_back(v);
    return rank(m, q) == static_cast<int>(basis.size());
}

bool is_upper_triangular(const Mat& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (m[i][j]) return false;
    return true;
}

bool is_diagonal(const Mat& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j && m[i][j]) return false;
    return true;
}

Mat elementary(int n, int a, int b, int lambda) {
    Mat m = identity(n);
    m[a][b] = lambda;
    return m;
}

std::vector<Flag> sort_faces(std::vector<Flag> v) {
    std::sort(v.begin(), v.end(), [](const Flag& x, const Flag& y) {
        if (x.size() != y.size()) return x.size() < y.size();
        return x < y;
    });
    return v;
}

// All chains among the vertices with mask set, as flags.
std::vector<Flag> chains(const Building& b, const std::vector<char>& mask, std::size_t guard) {
    std::vector<Flag> out;
    Flag cur;
    std::vector<int> verts;
    for (int id = 0; id < b.size(); ++id)
        if (mask[id]) verts.push_back(id);
    auto rec = [&](auto&& self, std::size_t from) -> void {
        for (std::size_t i = from; i < verts.size(); ++i) {
            const int v = verts[i];
            if (!cur.empty() && (b.dim(v) <= b.dim(cur.back()) || !b.contains(v, cur.back()))) continue;
            cur.push_back(v);
            out.push_back(cur);
            if (out.size() > guard) throw GuardError("flag enumeration exceeds guard");
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return sort_faces(std::move(out));
}

}  // namespace

int mod_inv(int a, int q) {
    a = md(a, q);
    if (a == 0) throw DomainError("no inverse of 0 mod " + std::to_string(q));
    for (int x = 1; x < q; ++x)
        if (a * x % q == 1) return x;
    throw DomainError("modulus is not prime");
}

Mat identity(int n) {
    Mat m(n, Row(n, 0));
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

Mat mul(const Mat& a, const Mat& b, int q) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Mat c(n, Row(m, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long long s = 0;
            for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
            c[i][j] = md(s, q);
        }
    return c;
}

Mat inverse(const Mat& a, int q) {
    const int n = static_cast<int>(a.size());
    Mat aug(n, Row(2 * n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug[i][j] = md(a[i][j], q);
        aug[i][n + i] = 1;
    }
    Mat r = rref(aug, q);
    if (static_cast<int>(r.size()) < n) throw DomainError("matrix is singular");
    Mat out(n, Row(n));
    for (int i = 0; i < n; ++i) {
        if (r[i][i] != 1) throw DomainError("matrix is singular");
        for (int j = 0; j < n; ++j) out[i][j] = r[i][n + j];
    }
    return out;
}

Row apply(const Mat& g, const Row& v, int q) {
    Row out(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        long long s = 0;
        for (std::size_t j = 0; j < v.size(); ++j) s += g[i][j] * v[j];
        out[i] = md(s, q);
    }
    return out;
}

Mat rref(Mat m, int q) {
    if (m.empty()) return m;
    const int rows = static_cast<int>(m.size()), cols = static_cast<int>(m[0].size());
    for (auto& r : m)
        for (auto& x : r) x = md(x, q);
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int p = -1;
        for (int i = r; i < rows; ++i)
            if (m[i][c]) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(m[r], m[p]);
        const int inv = mod_inv(m[r][c], q);
        for (auto& x : m[r]) x = x * inv % q;
        for (int i = 0; i < rows; ++i) {
            if (i == r || !m[i][c]) continue;
            const int f = m[i][c];
            for (int j = 0; j < cols; ++j) m[i][j] = md(m[i][j] - f * m[r][j], q);
        }
        ++r;
    }
    m.resize(r);
    return m;
}

int rank(const Mat& m, int q) { return static_cast<int>(rref(m, q).size()); }

Mat sum(const Mat& u, const Mat& w, int q) {
    Mat m = u;
    m.insert(m.end(), w.begin(), w.end());
    return rref(m, q);
}

Mat intersect(const Mat& u0, const Mat& w0, int q) {
    const Mat u = rref(u0, q), w = rref(w0, q);
    if (u.empty() || w.empty()) return {};
    const int n = static_cast<int>(u[0].size());
    Mat stacked = u;
    for (const auto& r : w) {
        Row neg(n);
        for (int j = 0; j < n; ++j) neg[j] = md(-r[j], q);
        stacked.push_back(neg);
    }
    const Mat ker = nullspace(transpose(stacked, n), static_cast<int>(stacked.size()), q);
    Mat out;
    for (const auto& c : ker) {
        Row v(n, 0);
        for (std::size_t i = 0; i < u.size(); ++i)
            for (int j = 0; j < n; ++j) v[j] = md(v[j] + c[i] * u[i][j], q);
        out.push_back(v);
    }
    return rref(out, q);
}

bool is_unipotent(const Mat& g, int q) {
    const int n = static_cast<int>(g.size());
    Mat nm = g;
    for (int i = 0; i < n; ++i) nm[i][i] = md(nm[i][i] - 1, q);
    Mat p = nm;
    for (int k = 1; k < n; ++k) p = mul(p, nm, q);
    for (const auto& r : p)
        for (int x : r)
            if (x) return false;
    return true;
}

std::string mat_str(const Mat& m) {
    std::string s = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s += ",";
        for (int x : m[i]) s += static_cast<char>('0' + x);
    }
    return s + "]";
}

// ---------------------------------------------------------------- Building

std::shared_ptr<const Building> Building::build(int n, int q) {
    if (q != 2 && q != 3 && q != 5 && q != 7) throw DomainError("q must be one of 2, 3, 5, 7");
    if (n < 2 || n > 6) throw DomainError("n must be in 2..6");
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const Building>> memo;
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find({n, q}); it != memo.end()) return it->second;

    auto b = std::make_shared<Building>();
    b->n_ = n;
    b->q_ = q;
    b->by_dim_.assign(n + 1, {});
    // RREF matrices by dimension, then pivot set, then free entries.
    for (int k = 1; k < n; ++k) {
        std::vector<int> piv(k);
        std::iota(piv.begin(), piv.end(), 0);
        while (true) {
            std::vector<std::pair<int, int>> free;
            for (int r = 0; r < k; ++r)
                for (int c = piv[r] + 1; c < n; ++c)
                    if (std::find(piv.begin(), piv.end(), c) == piv.end()) free.push_back({r, c});
            std::vector<int> digits(free.size(), 0);
            while (true) {
                Mat m(k, Row(n, 0));
                for (int r = 0; r < k; ++r) m[r][piv[r]] = 1;
                for (std::size_t t = 0; t < free.size(); ++t) m[free[t].first][free[t].second] = digits[t];
                const int id = static_cast<int>(b->basis_.size());
                b->index_[key_of(m)] = id;
                b->basis_.push_back(std::move(m));
                b->dim_.push_back(k);
                b->by_dim_[k].push_back(id);
                std::size_t t = free.size();
                while (t > 0 && ++digits[t - 1] == q) digits[--t] = 0;
                if (t == 0) break;
            }
            int i = k - 1;
            while (i >= 0 && piv[i] == n - k + i) --i;
            if (i < 0) break;
            ++piv[i];
            for (int j = i + 1; j < k; ++j) piv[j] = piv[j - 1] + 1;
        }
    }
    // Lines inside each subspace: normalized nonzero combinations of its rows.
    b->lines_in_.assign(b->size(), {});
    for (int id = 0; id < b->size(); ++id) {
        const Mat& m = b->basis_[id];
        const int k = static_cast<int>(m.size());
        std::vector<int> coef(k, 0);
        std::set<int> lines;
        while (true) {
            std::size_t t = coef.size();
            while (t > 0 && ++coef[t - 1] == q) coef[--t] = 0;
            if (t == 0) break;
            Row v(n, 0);
            for (int r = 0; r < k; ++r)
                for (int j = 0; j < n; ++j) v[j] = (v[j] + coef[r] * m[r][j]) % q;
            lines.insert(b->find({v}));
        }
        b->lines_in_[id].assign(lines.begin(), lines.end());
    }
    b->up_.assign(b->size(), {});
    for (int id = 0; id < b->size(); ++id) {
        if (b->dim_[id] == n - 1) continue;
        std::set<int> ups;
        for (int l : b->by_dim_[1]) {
            if (std::binary_search(b->lines_in_[id].begin(), b->lines_in_[id].end(), l)) continue;
            ups.insert(b->find(sum(b->basis_[id], b->basis_[l], q)));
        }
        b->up_[id].assign(ups.begin(), ups.end());
    }
    if (n >= 3) b->cx_ = cox::CoxeterComplex::build(rootsys::Family::A, n - 1);
    memo[{n, q}] = b;
    return b;
}

int Building::find(const Mat& rows) const {
    const Mat r = rref(rows, q_);
    if (r.empty()) return -1;
    if (static_cast<int>(r.size()) == n_) return -2;
    auto it = index_.find(key_of(r));
    if (it == index_.end()) throw std::logic_error("subspace missing from index");
    return it->second;
}

bool Building::contains(int big, int small) const {
    if (dim_[small] > dim_[big]) return false;
    const auto& bl = lines_in_[big];
    const auto& sl = lines_in_[small];
    return std::includes(bl.begin(), bl.end(), sl.begin(), sl.end());
}

std::vector<int> Building::action(const Mat& g) const {
    std::vector<int> out(size());
    for (int id = 0; id < size(); ++id) {
        Mat img;
        for (const auto& r : basis_[id]) img.push_back(bld::apply(g, r, q_));
        out[id] = find(img);
    }
    return out;
}

bool Building::is_flag(const Flag& f) const {
    if (f.empty()) return false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < 0 || f[i] >= size()) return false;
        if (i && (dim_[f[i]] <= dim_[f[i - 1]] || !contains(f[i], f[i - 1]))) return false;
    }
    return true;
}

Flag Building::apply(const Mat& g, const Flag& f) const {
    Flag out;
    for (int id : f) {
        Mat img;
        for (const auto& r : basis_[id]) img.push_back(bld::apply(g, r, q_));
        out.push_back(find(img));
    }
    return out;
}

std::vector<int> Building::type_of(const Flag& f) const {
    std::vector<int> t;
    for (int id : f) t.push_back(dim_[id]);
    return t;
}

Mat Building::flag_matrix(const Flag& f) const {
    return f.empty() ? Mat{} : basis_[f.back()];
}

const std::vector<Frame>& Building::frames() const {
    std::call_once(frames_once_, [this] { frames_ = enum_frames(*this); });
    return frames_;
}

// ---------------------------------------------------------------- enumeration

std::vector<Flag> enum_flags(const Building& b, const std::vector<int>& type, std::size_t guard) {
    if (type.empty()) throw DomainError("flag type must be nonempty");
    for (std::size_t i = 0; i < type.size(); ++i)
        if (type[i] < 1 || type[i] >= b.n() || (i && type[i] <= type[i - 1]))
            throw DomainError("flag type must be increasing within 1..n-1");
    if (count_flags(b.n(), b.q(), type) > guard) throw GuardError("flag count exceeds guard");
    std::vector<Flag> out;
    Flag cur;
    auto rec = [&](auto&& self, std::size_t level) -> void {
        if (level == type.size()) {
            out.push_back(cur);
            return;
        }
        for (int id : b.of_dim(type[level])) {
            if (level && !b.contains(id, cur.back())) continue;
            cur.push_back(id);
            self(self, level + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<Flag> enum_chambers(const Building& b, std::size_t guard) {
    std::vector<int> t(b.n() - 1);
    std::iota(t.begin(), t.end(), 1);
    return enum_flags(b, t, guard);
}

std::vector<Flag> enum_faces(const Building& b, std::size_t guard) {
    return chains(b, std::vector<char>(b.size(), 1), guard);
}

std::vector<Frame> enum_frames(const Building& b, std::size_t guard) {
    if (count_frames(b.n(), b.q()) > guard) throw GuardError("frame count exceeds guard");
    const auto& lines = b.of_dim(1);
    std::vector<Frame> out;
    Frame cur;
    Mat span;
    auto rec = [&](auto&& self, std::size_t from) -> void {
        if (static_cast<int>(cur.size()) == b.n()) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = from; i < lines.size(); ++i) {
            Mat next = span;
            next.push_back(b.basis(lines[i])[0]);
            if (rank(next, b.q()) != static_cast<int>(next.size())) continue;
            const Mat saved = span;
            span = next;
            cur.push_back(lines[i]);
            self(self, i + 1);
            cur.pop_back();
            span = saved;
        }
    };
    rec(rec, 0);
    return out;
}

namespace {
BigInt q_factorial(int n, int q) {
    BigInt r = 1;
    for (int i = 1; i <= n; ++i) {
        BigInt t = 0, p = 1;
        for (int j = 0; j < i; ++j) t += p, p *= q;
        r *= t;
    }
    return r;
}
}  // namespace

BigInt count_flags(int n, int q, const std::vector<int>& type) {
    BigInt r = q_factorial(n, q);
    int prev = 0;
    for (int d : type) {
        r /= q_factorial(d - prev, q);
        prev = d;
    }
    return r / q_factorial(n - prev, q);
}

BigInt count_frames(int n, int q) {
    BigInt gl = 1, qn = 1;
    for (int i = 0; i < n; ++i) qn *= q;
    BigInt qi = 1;
    for (int i = 0; i < n; ++i) {
        gl *= qn - qi;
        qi *= q;
    }
    BigInt den = 1;
    for (int i = 1; i <= n; ++i) den *= BigInt(q - 1) * i;
    return gl / den;
}

// ---------------------------------------------------------------- caches

namespace {

constexpr int kCacheVersion = 1;

std::string subspace_text(const Building& b, int id) {
    std::string s;
    for (std::size_t r = 0; r < b.basis(id).size(); ++r) {
        if (r) s += ',';
        for (int x : b.basis(id)[r]) s += static_cast<char>('0' + x);
    }
    return s;
}

int parse_subspace(const Building& b, const std::string& tok) {
    Mat m;
    std::stringstream ss(tok);
    std::string row;
    while (std::getline(ss, row, ',')) {
        if (static_cast<int>(row.size()) != b.n()) throw CacheError("bad row length in cache");
        Row r;
        for (char c : row) {
            if (c < '0' || c - '0' >= b.q()) throw CacheError("bad digit in cache");
            r.push_back(c - '0');
        }
        m.push_back(r);
    }
    if (rref(m, b.q()) != m || m.empty()) throw CacheError("cached subspace not in canonical form");
    const int id = b.find(m);
    if (id < 0) throw CacheError("cached subspace is not proper");
    return id;
}

std::string type_text(const std::vector<int>& type) {
    std::string s;
    for (std::size_t i = 0; i < type.size(); ++i) s += (i ? "_" : "") + std::to_string(type[i]);
    return s;
}

std::vector<std::vector<int>> load_lists(const Building& b, const std::string& path,
                                         const std::string& header) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind(header + " ", 0) != 0)
        throw CacheError("cache header mismatch: " + path);
    std::size_t count = std::stoul(line.substr(header.size() + 1));
    std::vector<std::vector<int>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<int> ids;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, '|')) ids.push_back(parse_subspace(b, tok));
        out.push_back(ids);
    }
    if (out.size() != count) throw CacheError("cache entry count mismatch: " + path);
    return out;
}

void store_lists(const Building& b, const std::string& path, const std::string& header,
                 const std::vector<std::vector<int>>& lists) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        out << header << " " << lists.size() << "\n";
        for (const auto& l : lists) {
            for (std::size_t i = 0; i < l.size(); ++i) out << (i ? "|" : "") << subspace_text(b, l[i]);
            out << "\n";
        }
        if (!out) throw Error("cannot write cache file " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<Flag> enum_flags_cached(const Building& b, const std::vector<int>& type,
                                    const std::string& cache_dir) {
    if (cache_dir.empty()) return enum_flags(b, type);
    const std::string header = "buildinglab-flags v" + std::to_string(kCacheVersion) + " n=" +
                               std::to_string(b.n()) + " q=" + std::to_string(b.q()) +
                               " type=" + type_text(type);
    const std::string path = cache_dir + "/flags-n" + std::to_string(b.n()) + "-q" +
                             std::to_string(b.q()) + "-t" + type_text(type) + ".txt";
    if (std::filesystem::exists(path)) {
        auto lists = load_lists(b, path, header);
        if (count_flags(b.n(), b.q(), type) != lists.size()) throw CacheError("flag cache has wrong size");
        for (std::size_t i = 0; i < lists.size(); ++i) {
            if (!b.is_flag(lists[i]) || b.type_of(lists[i]) != type) throw CacheError("invalid cached flag");
            if (i && !(lists[i - 1] < lists[i])) throw CacheError("flag cache not in canonical order");
        }
        return lists;
    }
    auto flags = enum_flags(b, type);
    store_lists(b, path, header, flags);
    return flags;
}

std::vector<Frame> enum_frames_cached(const Building& b, const std::string& cache_dir) {
    if (cache_dir.empty()) return enum_frames(b);
    const std::string header = "buildinglab-frames v" + std::to_string(kCacheVersion) + " n=" +
                               std::to_string(b.n()) + " q=" + std::to_string(b.q());
    const std::string path =
        cache_dir + "/frames-n" + std::to_string(b.n()) + "-q" + std::to_string(b.q()) + ".txt";
    if (std::filesystem::exists(path)) {
        auto lists = load_lists(b, path, header);
        if (count_frames(b.n(), b.q()) != lists.size()) throw CacheError("frame cache has wrong size");
        for (std::size_t i = 0; i < lists.size(); ++i) {
            Mat m;
            for (int l : lists[i]) {
                if (b.dim(l) != 1) throw CacheError("frame entry is not a line");
                m.push_back(b.basis(l)[0]);
            }
            if (static_cast<int>(lists[i].size()) != b.n() || rank(m, b.q()) != b.n() ||
                !std::is_sorted(lists[i].begin(), lists[i].end()))
                throw CacheError("invalid cached frame");
            if (i && !(lists[i - 1] < lists[i])) throw CacheError("frame cache not in canonical order");
        }
        return lists;
    }
    auto frames = enum_frames(b);
    store_lists(b, path, header, frames);
    return frames;
}

// ---------------------------------------------------------------- charts

ApartmentChart::ApartmentChart(BuildingPtr b, std::vector<int> ordered_lines)
    : b_(std::move(b)), lines_(std::move(ordered_lines)) {
    const int n = b_->n();
    if (static_cast<int>(lines_.size()) != n) throw DomainError("a frame needs n lines");
    std::vector<Row> cols;
    for (int l : lines_) {
        if (l < 0 || l >= b_->size() || b_->dim(l) != 1) throw DomainError("frame entry is not a line");
        cols.push_back(b_->basis(l)[0]);
    }
    if (rank(cols, b_->q()) != n) throw DomainError("frame lines are not independent");
    p_ = columns_to_mat(cols);
    subset_to_id_.assign(1u << n, -1);
    for (unsigned s = 1; s + 1 < (1u << n); ++s) {
        Mat m;
        for (int i = 0; i < n; ++i)
            if (s >> i & 1) m.push_back(cols[i]);
        subset_to_id_[s] = b_->find(m);
    }
}

Frame ApartmentChart::frame() const {
    Frame f = lines_;
    std::sort(f.begin(), f.end());
    return f;
}

std::optional<unsigned> ApartmentChart::subset_of(int subspace) const {
    unsigned s = 0;
    const auto& in = b_->lines_in(subspace);
    for (std::size_t i = 0; i < lines_.size(); ++i)
        if (std::binary_search(in.begin(), in.end(), lines_[i])) s |= 1u << i;
    if (std::popcount(s) != b_->dim(subspace)) return std::nullopt;
    return s;
}

int ApartmentChart::subspace_of(unsigned subset) const { return subset_to_id_.at(subset); }

bool ApartmentChart::contains(const Flag& f) const {
    for (int id : f)
        if (!subset_of(id)) return false;
    return true;
}

IVec ApartmentChart::vertex(int subspace) const {
    const auto s = subset_of(subspace);
    if (!s) throw HypothesisError("subspace is not in the apartment");
    const int n = b_->n(), k = b_->dim(subspace);
    IVec v(n);
    for (int i = 0; i < n; ++i) v[i] = (*s >> i & 1) ? n - k : -k;
    return v;
}

int ApartmentChart::cox_vertex(int subspace) const { return b_->coxeter()->find_vertex(vertex(subspace)); }

std::vector<Flag> ApartmentChart::faces() const {
    std::vector<char> mask(b_->size(), 0);
    for (unsigned s = 1; s + 1 < subset_to_id_.size(); ++s) mask[subset_to_id_[s]] = 1;
    return chains(*b_, mask, kFlagGuard);
}

std::vector<Flag> ApartmentChart::chambers() const {
    std::vector<Flag> out;
    std::vector<int> perm(b_->n());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        Flag f;
        unsigned s = 0;
        for (int i = 0; i + 1 < b_->n(); ++i) {
            s |= 1u << perm[i];
            f.push_back(subset_to_id_[s]);
        }
        out.push_back(f);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::sort(out.begin(), out.end());
    return out;
}

bool frame_contains(const Building& b, const Frame& fr, const Flag& f) {
    for (int id : f) {
        const auto& in = b.lines_in(id);
        int c = 0;
        for (int l : fr) c += std::binary_search(in.begin(), in.end(), l);
        if (c != b.dim(id)) return false;
    }
    return true;
}

Frame common_apartment(const Building& b, const Flag& f1, const Flag& f2) {
    const int n = b.n(), q = b.q();
    auto chain = [&](const Flag& f) {
        std::vector<Mat> c{Mat{}};
        for (int id : f) c.push_back(b.basis(id));
        c.push_back(identity(n));
        return c;
    };
    const auto V = chain(f1), W = chain(f2);
    Mat chosen;
    for (std::size_t i = 1; i < V.size(); ++i)
        for (std::size_t j = 1; j < W.size(); ++j) {
            const Mat t = intersect(V[i], W[j], q);
            Mat s = sum(intersect(V[i - 1], W[j], q), intersect(V[i], W[j - 1], q), q);
            for (const auto& r : t) {
                Mat next = s;
                next.push_back(r);
                if (rank(next, q) > static_cast<int>(s.size())) {
                    s = rref(next, q);
                    chosen.push_back(r);
                }
            }
        }
    if (static_cast<int>(chosen.size()) != n || rank(chosen, q) != n)
        throw std::logic_error("common refinement did not produce a basis");
    Frame fr;
    for (const auto& v : chosen) fr.push_back(b.find({v}));
    std::sort(fr.begin(), fr.end());
    if (!frame_contains(b, fr, f1) || !frame_contains(b, fr, f2))
        throw std::logic_error("common apartment misses a flag");
    return fr;
}

std::vector<Frame> common_frames(const Building& b, const Flag& f1, const Flag& f2, std::size_t limit) {
    std::vector<Frame> out;
    for (const auto& fr : b.frames()) {
        if (frame_contains(b, fr, f1) && frame_contains(b, fr, f2)) out.push_back(fr);
        if (out.size() >= limit) break;
    }
    return out;
}

// ---------------------------------------------------------------- points

Point vertex_point(int subspace) { return {{subspace}, {Rational(1)}}; }

Point barycenter(const Flag& f) { return {f, std::vector<Rational>(f.size(), Rational(1))}; }

QVec chart_coords(const ApartmentChart& c, const Point& p) {
    QVec x;
    for (std::size_t i = 0; i < p.face.size(); ++i) {
        const IVec v = c.vertex(p.face[i]);
        if (x.empty()) x.assign(v.size(), Rational(0));
        for (std::size_t j = 0; j < v.size(); ++j) x[j] += p.weights[i] * v[j];
    }
    return x;
}

Point point_from_chart(const ApartmentChart& c, const QVec& x0) {
    const int n = static_cast<int>(x0.size());
    Rational mean = 0;
    for (const auto& v : x0) mean += v;
    mean /= n;
    QVec x = x0;
    for (auto& v : x) v -= mean;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a] > x[b]; });
    Point p;
    unsigned s = 0;
    for (int k = 0; k + 1 < n; ++k) {
        s |= 1u << order[k];
        const Rational w = (x[order[k]] - x[order[k + 1]]) / n;
        if (w > 0) {
            p.face.push_back(c.subspace_of(s));
            p.weights.push_back(w);
        }
    }
    if (p.face.empty()) throw HypothesisError("chart point is zero");
    return p;
}

Point point_from_chart(const ApartmentChart& c, const Vec& x0, double tol) {
    const int n = static_cast<int>(x0.size());
    double mean = 0;
    for (double v : x0) mean += v / n;
    Vec x = x0;
    for (auto& v : x) v -= mean;
    const double scale = norm(x);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a] > x[b]; });
    Point p;
    unsigned s = 0;
    for (int k = 0; k + 1 < n; ++k) {
        s |= 1u << order[k];
        const double w = (x[order[k]] - x[order[k + 1]]) / (n * scale);
        if (w > tol) {
            p.face.push_back(c.subspace_of(s));
            p.weights.push_back(Rational(w));
        }
    }
    if (p.face.empty()) throw HypothesisError("chart point is zero");
    return p;
}

namespace {
std::pair<QVec, QVec> chart_pair(const BuildingPtr& b, const Point& p1, const Point& p2, const Frame* frame) {
    const Frame fr = frame ? *frame : common_apartment(*b, p1.face, p2.face);
    const ApartmentChart c(b, fr);
    return {chart_coords(c, p1), chart_coords(c, p2)};
}
}  // namespace

double building_distance(BuildingPtr b, const Point& p1, const Point& p2, const Frame* frame) {
    const auto [x, y] = chart_pair(b, p1, p2, frame);
    return cox::dist(to_double(x), to_double(y));
}

ExactScalar building_cos(BuildingPtr b, const Point& p1, const Point& p2, const Frame* frame) {
    const auto [x, y] = chart_pair(b, p1, p2, frame);
    return cox::cos_dist(x, y);
}

// ---------------------------------------------------------------- fixed sets

FixedPointSet FixedPointSet::of(BuildingPtr b, const Mat& g) {
    const auto act = b->action(g);
    std::vector<char> mask(b->size());
    for (int id = 0; id < b->size(); ++id) mask[id] = act[id] == id;
    return from_vertices(std::move(b), std::move(mask));
}

FixedPointSet FixedPointSet::from_vertices(BuildingPtr b, std::vector<char> vertex_mask) {
    FixedPointSet c;
    c.faces_ = chains(*b, vertex_mask, kFlagGuard);
    c.b_ = std::move(b);
    c.mask_ = std::move(vertex_mask);
    return c;
}

bool FixedPointSet::contains(const Flag& f) const {
    for (int id : f)
        if (!mask_[id]) return false;
    return !f.empty();
}

std::vector<int> FixedPointSet::vertices() const {
    std::vector<int> v;
    for (int id = 0; id < b_->size(); ++id)
        if (mask_[id]) v.push_back(id);
    return v;
}

std::vector<Flag> FixedPointSet::chambers() const {
    std::vector<Flag> out;
    for (const auto& f : faces_)
        if (static_cast<int>(f.size()) == b_->n() - 1) out.push_back(f);
    return out;
}

int FixedPointSet::dim() const {
    return faces_.empty() ? -1 : static_cast<int>(faces_.back().size()) - 1;
}

std::vector<Flag> chambers_through(const Building& b, const Flag& panel) {
    if (static_cast<int>(panel.size()) != b.n() - 2) throw DomainError("not a panel");
    // The missing dimension d sits between lower (dim d-1) and upper (dim d+1).
    int d = 1;
    std::size_t pos = 0;
    while (pos < panel.size() && b.dim(panel[pos]) == d) ++d, ++pos;
    const int lower = pos ? panel[pos - 1] : -1;
    const int upper = pos < panel.size() ? panel[pos] : -2;
    std::vector<int> cand = lower >= 0 ? b.covers(lower) : b.of_dim(1);
    std::vector<Flag> out;
    for (int v : cand) {
        if (upper >= 0 && !b.contains(upper, v)) continue;
        Flag f = panel;
        f.insert(f.begin() + pos, v);
        out.push_back(f);
    }
    return out;
}

std::vector<Flag> FixedPointSet::boundary_panels() const {
    std::vector<Flag> out;
    if (b_->n() < 3) return out;
    for (const auto& f : faces_) {
        if (static_cast<int>(f.size()) != b_->n() - 2) continue;
        int c = 0;
        for (const auto& ch : chambers_through(*b_, f)) c += contains(ch);
        if (c == 1) out.push_back(f);
    }
    return out;
}

FixedPointSet fixed_faces(BuildingPtr b, const Mat& g) { return FixedPointSet::of(std::move(b), g); }

FixedPointSet intersection(const FixedPointSet& a, const FixedPointSet& c) {
    std::vector<char> mask(a.building().size());
    for (int id = 0; id < a.building().size(); ++id) mask[id] = a.contains_vertex(id) && c.contains_vertex(id);
    return FixedPointSet::from_vertices(a.building_ptr(), std::move(mask));
}

std::string dump_fixed_set(const FixedPointSet& c, const Mat& g) {
    const auto& b = c.building();
    nlohmann::ordered_json j;
    j["format"] = "buildinglab-fixed-set";
    j["version"] = 1;
    j["n"] = b.n();
    j["q"] = b.q();
    j["g"] = g;
    j["dim"] = c.dim();
    auto faces = nlohmann::ordered_json::array();
    for (const auto& f : c.faces()) {
        auto flag = nlohmann::ordered_json::array();
        for (int id : f) flag.push_back(b.basis(id));
        faces.push_back(flag);
    }
    j["faces"] = faces;
    return j.dump(1) + "\n";
}

bool chamber_membership(const Building& b, const Mat& g, const Flag& chamber) {
    const int n = b.n(), q = b.q();
    if (static_cast<int>(chamber.size()) != n - 1 || !b.is_flag(chamber)) throw DomainError("not a chamber");
    Mat gm1 = g;
    for (int i = 0; i < n; ++i) gm1[i][i] = (gm1[i][i] + q - 1) % q;
    Mat prev;
    for (std::size_t i = 0; i <= chamber.size(); ++i) {
        const Mat cur = i < chamber.size() ? b.basis(chamber[i]) : identity(n);
        for (const auto& r : cur) {
            const Row w = apply(gm1, r, q);
            if (prev.empty() ? std::any_of(w.begin(), w.end(), [](int x) { return x != 0; })
                             : !in_span_rows(prev, w, q))
                return false;
        }
        prev = cur;
    }
    return true;
}

Mat root_group_element(const ApartmentChart& c, int a, int b, int lambda) {
    const int n = static_cast<int>(c.lines().size()), q = c.building().q();
    if (a == b || a < 0 || b < 0 || a >= n || b >= n) throw DomainError("root indices out of range");
    const Mat& P = c.basis_matrix();
    return mul(mul(P, elementary(n, a, b, md(lambda, q)), q), inverse(P, q), q);
}

// ---------------------------------------------------------------- unipotent structure

LeviSplit levi_split(BuildingPtr b, const Mat& g, const Frame& frame) {
    const int n = b->n(), q = b->q();
    std::vector<int> order = frame;
    std::sort(order.begin(), order.end());
    do {
        const ApartmentChart c(b, order);
        const Mat& P = c.basis_matrix();
        const Mat Pi = inverse(P, q);
        const Mat gp = mul(mul(Pi, g, q), P, q);
        if (!is_upper_triangular(gp)) continue;
        Mat hp(n, Row(n, 0)), hinv(n, Row(n, 0));
        for (int i = 0; i < n; ++i) hp[i][i] = gp[i][i], hinv[i][i] = mod_inv(gp[i][i], q);
        LeviSplit out;
        out.u = mul(mul(P, mul(gp, hinv, q), q), Pi, q);
        out.h = mul(mul(P, hp, q), Pi, q);
        out.ordered_lines = order;
        if (mul(out.u, out.h, q) != g || !is_unipotent(out.u, q))
            throw std::logic_error("levi_split: factorization check failed");
        const auto ag = b->action(g), au = b->action(out.u), ah = b->action(out.h);
        for (unsigned s = 1; s + 1 < (1u << n); ++s) {
            const int id = c.subspace_of(s);
            if (ah[id] != id || (ag[id] == id) != (au[id] == id))
                throw std::logic_error("levi_split: fixed sets differ on the apartment");
        }
        return out;
    } while (std::next_permutation(order.begin(), order.end()));
    throw HypothesisError("levi_split: g fixes no chamber of the apartment");
}

std::vector<GalleryFactor> gallery_coordinates(const ApartmentChart& c, const Mat& u,
                                               const std::vector<int>& word) {
    const int n = static_cast<int>(c.lines().size()), q = c.building().q();
    if (static_cast<int>(word.size()) != n * (n - 1) / 2)
        throw DomainError("word length differs from the length of the longest element");
    std::vector<int> w(n);
    std::iota(w.begin(), w.end(), 0);
    std::vector<std::pair<int, int>> roots;
    for (int s : word) {
        if (s < 1 || s >= n) throw DomainError("generator out of range");
        const int i = s - 1;
        if (w[i] > w[i + 1]) throw DomainError("word is not reduced");
        roots.push_back({w[i], w[i + 1]});
        std::swap(w[i], w[i + 1]);
    }
    const Mat& P = c.basis_matrix();
    const Mat Pi = inverse(P, q);
    Mat h = mul(mul(Pi, u, q), P, q);
    for (int i = 0; i < n; ++i)
        if (h[i][i] != 1) throw HypothesisError("u is not unitriangular in the chart basis");
    if (!is_upper_triangular(h)) throw HypothesisError("u is not unitriangular in the chart basis");

    std::vector<GalleryFactor> out;
    for (std::size_t k = 0; k < word.size(); ++k) {
        const int i = word[k] - 1;
        const int lambda = h[i][i + 1];
        h = mul(elementary(n, i, i + 1, md(-lambda, q)), h, q);
        std::swap(h[i], h[i + 1]);
        for (auto& r : h) std::swap(r[i], r[i + 1]);
        const auto [a, bb] = roots[k];
        out.push_back({a, bb, lambda, mul(mul(P, elementary(n, a, bb, lambda), q), Pi, q)});
    }
    if (h != identity(n)) throw std::logic_error("gallery_coordinates: residual factor");
    Mat prod = identity(n);
    for (const auto& f : out) prod = mul(prod, f.element, q);
    if (prod != u) throw std::logic_error("gallery_coordinates: product check failed");
    return out;
}

std::vector<std::vector<int>> reduced_words_w0(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> w(n), word;
    std::iota(w.begin(), w.end(), 0);
    const std::size_t len = static_cast<std::size_t>(n * (n - 1) / 2);
    auto rec = [&](auto&& self) -> void {
        if (word.size() == len) {
            out.push_back(word);
            return;
        }
        for (int i = 0; i + 1 < n; ++i) {
            if (w[i] > w[i + 1]) continue;
            std::swap(w[i], w[i + 1]);
            word.push_back(i + 1);
            self(self);
            word.pop_back();
            std::swap(w[i], w[i + 1]);
        }
    };
    rec(rec);
    return out;
}

// ---------------------------------------------------------------- traces and support

cox::ConvexSubcomplex trace(const FixedPointSet& c, const ApartmentChart& chart) {
    const auto& b = c.building();
    const int n = b.n();
    std::vector<int> verts;
    for (unsigned s = 1; s + 1 < (1u << n); ++s) {
        const int id = chart.subspace_of(s);
        if (c.contains_vertex(id)) verts.push_back(chart.cox_vertex(id));
    }
    if (verts.empty()) throw HypothesisError("fixed point set misses the apartment");
    std::sort(verts.begin(), verts.end());
    auto K = cox::ConvexSubcomplex::hull_of_vertices(b.coxeter(), verts);
    if (K.vertices() != verts) throw std::logic_error("trace of the fixed point set is not convex");
    return K;
}

namespace {
void add_subfaces(const Flag& f, std::set<Flag>& out) {
    for (unsigned m = 1; m < (1u << f.size()); ++m) {
        Flag sub;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (m >> i & 1) sub.push_back(f[i]);
        out.insert(sub);
    }
}
}  // namespace

std::vector<Flag> FixedPointSet::boundary_faces() const {
    std::set<Flag> out;
    for (const auto& p : boundary_panels()) add_subfaces(p, out);
    return {out.begin(), out.end()};
}

bool supports(const FixedPointSet& c, const ApartmentChart& chart) {
    return supports(c, chart, c.boundary_faces());
}

bool supports(const FixedPointSet& c, const ApartmentChart& chart, const std::vector<Flag>& boundary) {
    const auto& b = c.building();
    int dim_trace = -1;
    std::vector<Flag> inside;
    for (const auto& f : chart.faces())
        if (c.contains(f)) {
            inside.push_back(f);
            dim_trace = std::max(dim_trace, static_cast<int>(f.size()) - 1);
        }
    if (dim_trace != c.dim()) return false;
    if (dim_trace != b.n() - 2 || b.n() < 3) return true;
    std::set<Flag> trace_boundary;
    for (const auto& f : inside) {
        if (static_cast<int>(f.size()) != b.n() - 2) continue;
        int in_a = 0;
        for (const auto& ch : chambers_through(b, f)) in_a += c.contains(ch) && chart.contains(ch);
        if (in_a == 0) return false;
        if (in_a == 1) add_subfaces(f, trace_boundary);
    }
    for (const auto& f : inside)
        if (trace_boundary.count(f) != static_cast<std::size_t>(std::binary_search(boundary.begin(), boundary.end(), f)))
            return false;
    return true;
}

// ---------------------------------------------------------------- subbuildings

bool antipode_prefilter(const FixedPointSet& c) {
    const auto& b = c.building();
    const int d = c.dim();
    if (d < 0) return true;
    std::vector<Flag> top;
    for (const auto& f : c.faces())
        if (static_cast<int>(f.size()) == d + 1) top.push_back(f);
    auto opposite = [&](const Flag& s, const Flag& t) {
        const std::size_t k = s.size();
        for (std::size_t i = 0; i < k; ++i) {
            const int other = t[k - 1 - i];
            if (b.dim(s[i]) + b.dim(other) != b.n()) return false;
            if (rank(sum(b.basis(s[i]), b.basis(other), b.q()), b.q()) != b.n()) return false;
        }
        return true;
    };
    for (const auto& s : top) {
        bool found = false;
        for (const auto& t : top)
            if (opposite(s, t)) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    return true;
}

bool subbuilding_test(const FixedPointSet& c, const SubbuildingOptions& opt) {
    const auto& b = c.building();
    const int d = c.dim();
    if (d < 0) return true;
    if (opt.prefilter && !antipode_prefilter(c)) return false;
    const int m = d + 2;
    std::map<Flag, int> top_index;
    for (const auto& f : c.faces())
        if (static_cast<int>(f.size()) == d + 1) top_index.emplace(f, static_cast<int>(top_index.size()));
    const std::size_t T = top_index.size();
    if (T * T > opt.guard) throw GuardError("subbuilding test exceeds guard");
    std::vector<char> covered(T * T, 0);
    std::size_t work = 0;

    const std::vector<int> verts = c.vertices();
    std::vector<int> blocks;
    Mat span;
    std::vector<int> perm(m);
    auto visit = [&]() {
        std::vector<int> part(1u << m, -1);
        for (unsigned s = 1; s + 1 < (1u << m); ++s) {
            Mat rows;
            for (int i = 0; i < m; ++i)
                if (s >> i & 1) rows.insert(rows.end(), b.basis(blocks[i]).begin(), b.basis(blocks[i]).end());
            const int id = b.find(rows);
            if (!c.contains_vertex(id)) return;
            part[s] = id;
        }
        std::vector<int> tops;
        std::iota(perm.begin(), perm.end(), 0);
        do {
            Flag f;
            unsigned s = 0;
            for (int i = 0; i + 1 < m; ++i) {
                s |= 1u << perm[i];
                f.push_back(part[s]);
            }
            tops.push_back(top_index.at(f));
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (int x : tops)
            for (int y : tops) covered[x * T + y] = 1;
    };
    auto rec = [&](auto&& self, std::size_t from, int dims) -> void {
        if (++work > opt.guard) throw GuardError("subbuilding test exceeds guard");
        if (static_cast<int>(blocks.size()) == m) {
            if (dims == b.n()) visit();
            return;
        }
        const int left = m - static_cast<int>(blocks.size());
        for (std::size_t i = from; i < verts.size(); ++i) {
            const int v = verts[i];
            if (dims + b.dim(v) + (left - 1) > b.n()) continue;
            Mat next = span;
            next.insert(next.end(), b.basis(v).begin(), b.basis(v).end());
            if (rank(next, b.q()) != dims + b.dim(v)) continue;
            const Mat saved = span;
            span = next;
            blocks.push_back(v);
            self(self, i + 1, dims + b.dim(v));
            blocks.pop_back();
            span = saved;
        }
    };
    rec(rec, 0, 0);
    return std::all_of(covered.begin(), covered.end(), [](char x) { return x != 0; });
}

// ---------------------------------------------------------------- incenters of fixed sets

std::string status_name(FixStatus s) {
    switch (s) {
        case FixStatus::ok: return "ok";
        case FixStatus::subbuilding: return "subbuilding";
        case FixStatus::no_supporting_apartment: return "no_supporting_apartment";
        case FixStatus::no_negative_value: return "no_negative_value";
    }
    return "?";
}

FixIncenterResult fix_incenter(BuildingPtr b, const Mat& g, const FixIncenterOptions& opt) {
    FixIncenterResult res;
    const int q = b->q();
    res.unipotent = is_unipotent(g, q);
    const FixedPointSet C = FixedPointSet::of(b, g);
    if (C.empty()) {
        res.status = FixStatus::subbuilding;
        res.detail = "empty fixed point set";
        return res;
    }
    if (subbuilding_test(C)) {
        res.status = FixStatus::subbuilding;
        res.detail = "fixed point set is a subbuilding";
        return res;
    }
    if (C.dim() != b->n() - 2) throw HypothesisError("fix_incenter: fixed point set is not top-dimensional");

    std::vector<std::size_t> support;
    const auto& frames = b->frames();
    const auto boundary = C.boundary_faces();
    for (std::size_t i = 0; i < frames.size(); ++i)
        if (supports(C, ApartmentChart(b, frames[i]), boundary)) support.push_back(i);
    res.supporting_apartments = static_cast<int>(support.size());
    if (support.empty()) {
        res.status = FixStatus::no_supporting_apartment;
        res.detail = "no apartment supports the fixed point set";
        return res;
    }
    if (!res.unipotent) {
        const bool split = std::any_of(support.begin(), support.end(), [&](std::size_t i) {
            try {
                levi_split(b, g, frames[i]);
                return true;
            } catch (const HypothesisError&) {
                return false;
            }
        });
        if (!split) throw HypothesisError("fix_incenter: levi_split fails on every supporting apartment");
    }

    const auto w = cox::WeightAssignment::standard(b->coxeter()->rs);
    std::map<std::size_t, cox::ConvexSubcomplex> traces;
    auto trace_of = [&](std::size_t i) -> const cox::ConvexSubcomplex& {
        auto it = traces.find(i);
        if (it == traces.end()) it = traces.emplace(i, trace(C, ApartmentChart(b, frames[i]))).first;
        return it->second;
    };

    // Independence certificate at every fixed vertex.
    const std::vector<int> verts = C.vertices();
    for (int v : verts) {
        std::vector<std::size_t> through;
        for (std::size_t i : support)
            if (frame_contains(*b, frames[i], {v})) through.push_back(i);
        if (through.size() > opt.all_apartments_limit) {
            Rng rng(opt.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(v + 1)));
            rng.shuffle(through);
            through.resize(opt.sampled_apartments);
        }
        std::optional<ExactScalar> first;
        double first_d = 0;
        for (std::size_t i : through) {
            const ApartmentChart chart(b, frames[i]);
            const auto val = cox::f_K_exact(trace_of(i), w, to_rational(chart.vertex(v))).value;
            ++res.evaluations;
            if (!first) {
                first = val;
                first_d = val.to_double();
            } else {
                if (!(val == *first)) res.exact_agreement = false;
                res.max_discrepancy = std::max(res.max_discrepancy, std::abs(val.to_double() - first_d));
            }
        }
        ++res.vertices_checked;
    }

    // f on C restricts to f_{C∩A} on each supporting apartment, and every
    // point of C lies in one of them, so the global minimum is the best
    // minimum over all supporting traces.
    std::optional<std::size_t> best;
    std::vector<std::pair<std::size_t, inc::IncenterResult>> results;
    for (std::size_t i : support) {
        auto r = inc::minimize(trace_of(i), w);
        if (r.status != inc::Status::ok) continue;
        results.push_back({i, std::move(r)});
        const auto& cur = results.back().second;
        if (!best || cur.value < results[*best].second.value - 1e-12) best = results.size() - 1;
    }
    if (!best) {
        res.status = FixStatus::no_negative_value;
        res.detail = "f is nonnegative on every supporting trace";
        return res;
    }
    auto to_point = [&](std::size_t i, const inc::IncenterResult& r) {
        const ApartmentChart chart(b, frames[i]);
        return r.exact_point ? point_from_chart(chart, *r.exact_point) : point_from_chart(chart, r.point);
    };
    res.apartment = frames[results[*best].first];
    res.incenter = results[*best].second;
    res.point = to_point(results[*best].first, res.incenter);
    for (const auto& [i, r] : results) {
        if (r.value > res.incenter.value + 1e-9) continue;
        if (building_distance(b, res.point, to_point(i, r)) > 1e-7)
            throw std::logic_error("fix_incenter: two supporting traces attain the minimum at different points");
        ++res.minimizing_apartments;
    }
    for (int v : verts) {
        res.radius = std::max(res.radius, building_distance(b, res.point, vertex_point(v)));
        if (res.incenter.exact_point) {
            const ExactScalar cs = building_cos(b, res.point, vertex_point(v));
            if (!res.min_cos || cs < *res.min_cos) res.min_cos = cs;
        }
    }
    return res;
}

namespace {

// Pair sweeps revisit the same elements; keep their incenters.
FixIncenterResult cached_incenter(const BuildingPtr& b, const Mat& g) {
    static std::mutex mu;
    static std::map<std::pair<const Building*, Mat>, FixIncenterResult> memo;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find({b.get(), g});
        if (it != memo.end()) return it->second;
    }
    auto r = fix_incenter(b, g);
    std::lock_guard<std::mutex> lock(mu);
    return memo.emplace(std::pair{b.get(), g}, std::move(r)).first->second;
}

}  // namespace

CommutingWitness commuting_unipotent_witness(BuildingPtr b, const Mat& g1, const Mat& g2) {
    const int q = b->q(), n = b->n();
    if (!is_unipotent(g1, q) || !is_unipotent(g2, q)) throw HypothesisError("elements must be unipotent");
    if (mul(g1, g2, q) != mul(g2, g1, q)) throw HypothesisError("elements must commute");
    CommutingWitness out;
    out.product_unipotent = is_unipotent(mul(g1, g2, q), q);
    out.invariance = true;

    std::vector<Point> centers;
    for (const Mat* g : {&g1, &g2}) {
        if (*g == identity(n)) continue;
        const auto r = cached_incenter(b, *g);
        if (r.status != FixStatus::ok) throw std::logic_error("unipotent element without incenter");
        centers.push_back(r.point);
        const Mat& other = g == &g1 ? g2 : g1;
        if (b->apply(other, r.point.face) != r.point.face) out.invariance = false;
    }
    const FixedPointSet both = intersection(FixedPointSet::of(b, g1), FixedPointSet::of(b, g2));
    Flag carrier;
    if (centers.size() == 1) {
        carrier = centers[0].face;
    } else if (centers.size() == 2) {
        const Frame fr = common_apartment(*b, centers[0].face, centers[1].face);
        const ApartmentChart c(b, fr);
        const Vec x = normalized(to_double(chart_coords(c, centers[0])));
        const Vec y = normalized(to_double(chart_coords(c, centers[1])));
        Vec m(x.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = x[i] + y[i];
        if (norm(m) < 1e-9) throw std::logic_error("incenters are antipodal");
        const Point mid = point_from_chart(c, m, 1e-9);
        carrier = mid.face;
        out.midpoint_face = mid;
    }
    for (const auto& ch : both.chambers()) {
        if (!std::includes(ch.begin(), ch.end(), carrier.begin(), carrier.end())) continue;
        out.chamber = ch;
        break;
    }
    if (!out.chamber.empty()) {
        if (!chamber_membership(*b, g1, out.chamber) || !chamber_membership(*b, g2, out.chamber) ||
            !chamber_membership(*b, mul(g1, g2, q), out.chamber))
            out.product_unipotent = false;
    }
    return out;
}

bool jordan_fix_check(BuildingPtr b, const Mat& u, const Mat& k, const Frame& frame) {
    const int q = b->q();
    if (!is_unipotent(u, q)) throw HypothesisError("u must be unipotent");
    const ApartmentChart c(b, frame);
    const Mat& P = c.basis_matrix();
    if (!is_diagonal(mul(mul(inverse(P, q), k, q), P, q)))
        throw HypothesisError("k must be diagonal in the frame basis");
    if (mul(u, k, q) != mul(k, u, q)) throw HypothesisError("u and k must commute");
    const auto lhs = FixedPointSet::of(b, mul(u, k, q));
    const auto rhs = intersection(FixedPointSet::of(b, u), FixedPointSet::of(b, k));
    return lhs.faces() == rhs.faces();
}

std::vector<Flag> star_violations(const FixedPointSet& c) {
    std::vector<Flag> out;
    const auto& b = c.building();
    if (b.n() < 3) return out;
    for (const auto& f : c.faces()) {
        if (static_cast<int>(f.size()) != b.n() - 2) continue;
        const auto star = chambers_through(b, f);
        const auto fixed = std::count_if(star.begin(), star.end(), [&](const Flag& ch) { return c.contains(ch); });
        if (fixed >= 2 && fixed != static_cast<long>(star.size())) out.push_back(f);
    }
    return out;
}

// ---------------------------------------------------------------- groups

std::vector<Mat> enum_gl(int n, int q, std::size_t guard) {
    std::vector<Row> vectors;
    Row v(n, 0);
    while (true) {
        std::size_t t = v.size();
        while (t > 0 && ++v[t - 1] == q) v[--t] = 0;
        if (t == 0) break;
        vectors.push_back(v);
    }
    std::vector<Mat> out;
    Mat cur;
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(cur.size()) == n) {
            out.push_back(cur);
            if (out.size() > guard) throw GuardError("group enumeration exceeds guard");
            return;
        }
        for (const auto& r : vectors) {
            cur.push_back(r);
            if (rank(cur, q) == static_cast<int>(cur.size())) self(self);
            cur.pop_back();
        }
    };
    rec(rec);
    return out;
}

std::vector<Mat> enum_unitriangular(int n, int q) {
    std::vector<std::pair<int, int>> pos;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pos.push_back({i, j});
    std::vector<int> digits(pos.size(), 0);
    std::vector<Mat> out;
    while (true) {
        Mat m = identity(n);
        for (std::size_t t = 0; t < pos.size(); ++t) m[pos[t].first][pos[t].second] = digits[t];
        out.push_back(m);
        std::size_t t = digits.size();
        while (t > 0 && ++digits[t - 1] == q) digits[--t] = 0;
        if (t == 0) break;
    }
    return out;
}

Mat random_invertible(int n, int q, Rng& rng) {
    while (true) {
        Mat m(n, Row(n));
        for (auto& r : m)
            for (auto& x : r) x = rng.below_int(q);
        if (rank(m, q) == n) return m;
    }
}

bool ball_equality(BuildingPtr b, const ApartmentChart& c, int a, int bb, int lambda) {
    const int n = b->n();
    if (md(lambda, b->q()) == 0) throw HypothesisError("ball_equality needs lambda != 0");
    const Mat g = root_group_element(c, a, bb, lambda);
    const FixedPointSet fix = FixedPointSet::of(b, g);
    // Root center: direction e_a - e_b, carried by the edge (L_a, sum of L_i for i != b).
    const int lo = c.subspace_of(1u << a);
    const int hi = c.subspace_of(((1u << n) - 1) & ~(1u << bb));
    const Point center = lo == hi ? Point{{lo}, {Rational(2)}} : Point{{lo, hi}, {Rational(1), Rational(1)}};
    std::vector<char> ball(b->size(), 0);
    for (int id = 0; id < b->size(); ++id) ball[id] = building_cos(b, center, vertex_point(id)).sign() >= 0;
    const FixedPointSet B = FixedPointSet::from_vertices(b, ball);
    return B.faces() == fix.faces();
}

}  // namespace bl::bld
