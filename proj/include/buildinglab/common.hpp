#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bl {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using IVec = std::vector<long long>;
using QVec = std::vector<Rational>;
using Vec = std::vector<double>;

// Base of all typed errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unsupported family/rank, index out of range, malformed input.
class DomainError : public Error {
public:
    using Error::Error;
};

// An enumeration would exceed its configured size limit.
class GuardError : public Error {
public:
    using Error::Error;
};

// A documented precondition of a geometric operation does not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

// A cache file exists but cannot be parsed or does not match.
class CacheError : public Error {
public:
    using Error::Error;
};

inline constexpr double kTol = 1e-9;
inline constexpr double kAntipodalTol = 1e-12;
inline constexpr double kMemberTol = 1e-12;

long long dot(const IVec& a, const IVec& b);
double dot(const Vec& a, const Vec& b);
Rational dot(const QVec& a, const QVec& b);
double norm(const Vec& a);
Vec normalized(const Vec& a);
Vec to_double(const IVec& a);
Vec to_double(const QVec& a);
QVec to_rational(const IVec& a);

// arccos with the argument clamped to [-1, 1].
double safe_acos(double c);

}  // namespace bl
