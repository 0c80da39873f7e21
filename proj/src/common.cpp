#include "buildinglab/common.hpp"

#include <algorithm>
#include <cmath>

namespace bl {

long long dot(const IVec& a, const IVec& b) {
    long long s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rational dot(const QVec& a, const QVec& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec normalized(const Vec& a) {
    double n = norm(a);
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / n;
    return out;
}

Vec to_double(const IVec& a) { return Vec(a.begin(), a.end()); }

Vec to_double(const QVec& a) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].convert_to<double>();
    return out;
}

QVec to_rational(const IVec& a) {
    QVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = Rational(a[i]);
    return out;
}

double safe_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

}  // namespace bl
