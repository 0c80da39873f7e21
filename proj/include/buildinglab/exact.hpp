#pragma once

#include "buildinglab/common.hpp"

#include <compare>
#include <string>

namespace bl {

// Value coefficient * sqrt(radicand) with a squarefree radicand.
// Zero is stored as 0 * sqrt(1).
class ExactScalar {
public:
    ExactScalar();
    ExactScalar(Rational coefficient, BigInt radicand);
    static ExactScalar rational(const Rational& r);
    // sqrt(x) for a non-negative rational x.
    static ExactScalar sqrt_of(const Rational& x);
    // num / sqrt(den_sq) for den_sq > 0.
    static ExactScalar ratio_sqrt(const Rational& num, const Rational& den_sq);

    const Rational& coefficient() const { return q_; }
    const BigInt& radicand() const { return r_; }

    int sign() const;
    Rational square() const;  // value^2, always rational
    double to_double() const;
    bool is_rational() const { return r_ == 1; }
    std::string str() const;

    ExactScalar operator-() const;
    ExactScalar operator*(const ExactScalar& o) const;
    ExactScalar operator/(const ExactScalar& o) const;
    ExactScalar operator*(const Rational& r) const;
    // Only defined when both radicands agree or one side is zero.
    ExactScalar operator+(const ExactScalar& o) const;
    ExactScalar operator-(const ExactScalar& o) const;

    bool operator==(const ExactScalar& o) const;
    std::strong_ordering operator<=>(const ExactScalar& o) const;

private:
    Rational q_;
    BigInt r_;
    void normalize();
};

// Sign of a + b for arbitrary radicands.
int sign_of_sum(const ExactScalar& a, const ExactScalar& b);

}  // namespace bl
