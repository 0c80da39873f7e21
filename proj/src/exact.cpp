#include "buildinglab/exact.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <sstream>

namespace bl {

namespace {

// Writes r = s^2 * f with f squarefree; returns (s, f).
std::pair<BigInt, BigInt> split_square(BigInt r) {
    BigInt s = 1, f = 1;
    for (BigInt p = 2; p * p <= r; ++p) {
        while (r % (p * p) == 0) {
            r /= p * p;
            s *= p;
        }
        if (r % p == 0) {
            r /= p;
            f *= p;
        }
    }
    f *= r;
    return {s, f};
}

}  // namespace

ExactScalar::ExactScalar() : q_(0), r_(1) {}

ExactScalar::ExactScalar(Rational coefficient, BigInt radicand)
    : q_(std::move(coefficient)), r_(std::move(radicand)) {
    if (r_ < 0) throw DomainError("ExactScalar: negative radicand");
    normalize();
}

void ExactScalar::normalize() {
    if (q_ == 0 || r_ == 0) {
        q_ = 0;
        r_ = 1;
        return;
    }
    auto [s, f] = split_square(r_);
    q_ *= Rational(s);
    r_ = f;
}

ExactScalar ExactScalar::rational(const Rational& r) { return ExactScalar(r, 1); }

ExactScalar ExactScalar::sqrt_of(const Rational& x) {
    if (x < 0) throw DomainError("ExactScalar::sqrt_of: negative argument");
    // sqrt(a/b) = sqrt(a*b)/b
    BigInt a = numerator(x), b = denominator(x);
    return ExactScalar(Rational(1, b), a * b);
}

ExactScalar ExactScalar::ratio_sqrt(const Rational& num, const Rational& den_sq) {
    if (den_sq <= 0) throw DomainError("ExactScalar::ratio_sqrt: non-positive denominator");
    return sqrt_of(1 / den_sq) * num;
}

int ExactScalar::sign() const { return q_ > 0 ? 1 : (q_ < 0 ? -1 : 0); }

Rational ExactScalar::square() const { return q_ * q_ * Rational(r_); }

double ExactScalar::to_double() const {
    return q_.convert_to<double>() * std::sqrt(r_.convert_to<double>());
}

std::string ExactScalar::str() const {
    std::ostringstream os;
    os << q_;
    if (r_ != 1) os << "*sqrt(" << r_ << ")";
    return os.str();
}

ExactScalar ExactScalar::operator-() const { return ExactScalar(-q_, r_); }

ExactScalar ExactScalar::operator*(const ExactScalar& o) const {
    return ExactScalar(q_ * o.q_, r_ * o.r_);
}

ExactScalar ExactScalar::operator/(const ExactScalar& o) const {
    if (o.q_ == 0) throw DomainError("ExactScalar: division by zero");
    // q1 sqrt(r1) / (q2 sqrt(r2)) = q1/(q2 r2) * sqrt(r1 r2)
    return ExactScalar(q_ / (o.q_ * Rational(o.r_)), r_ * o.r_);
}

ExactScalar ExactScalar::operator*(const Rational& r) const { return ExactScalar(q_ * r, r_); }

ExactScalar ExactScalar::operator+(const ExactScalar& o) const {
    if (q_ == 0) return o;
    if (o.q_ == 0) return *this;
    if (r_ != o.r_) throw DomainError("ExactScalar: sum of unlike radicals");
    return ExactScalar(q_ + o.q_, r_);
}

ExactScalar ExactScalar::operator-(const ExactScalar& o) const { return *this + (-o); }

bool ExactScalar::operator==(const ExactScalar& o) const { return q_ == o.q_ && r_ == o.r_; }

std::strong_ordering ExactScalar::operator<=>(const ExactScalar& o) const {
    int s = sign_of_sum(*this, -o);
    if (s < 0) return std::strong_ordering::less;
    if (s > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

int sign_of_sum(const ExactScalar& a, const ExactScalar& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa == 0) return sb;
    if (sb == 0) return sa;
    if (sa == sb) return sa;
    Rational a2 = a.square(), b2 = b.square();
    if (a2 > b2) return sa;
    if (a2 < b2) return sb;
    return 0;
}

}  // namespace bl
