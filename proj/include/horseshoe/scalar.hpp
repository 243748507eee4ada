#pragma once
// Scalar backends: IEEE double, exact rationals (GMP) and variable-precision
// binary floats (MPFR), plus the handful of helpers the generic code needs.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace hs {

namespace mp = boost::multiprecision;

using Rational = mp::number<mp::gmp_rational, mp::et_off>;
using BigInt = mp::number<mp::gmp_int, mp::et_off>;
using BigFloat = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

enum class Backend { Rational, Double, BigFloat };

inline const char* to_string(Backend b) {
    switch (b) {
    case Backend::Rational: return "rational";
    case Backend::Double: return "double";
    case Backend::BigFloat: return "mpfr-like";
    }
    return "?";
}

inline unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

inline unsigned bigfloat_bits() {
    return static_cast<unsigned>(std::ceil(BigFloat::default_precision() / 0.30102999566398120));
}

// Sets the working precision of newly created BigFloat values; restores on exit.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits) : saved_(BigFloat::default_precision()) {
        BigFloat::default_precision(bits_to_digits10(bits));
    }
    ~PrecisionScope() { BigFloat::default_precision(saved_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

// Precision used when an exact rational has to pass through exp/sqrt/cos.
inline unsigned& rational_transcendental_bits() {
    static unsigned bits = 256;
    return bits;
}

// Exact decimal or fraction parser: "5/2", "-0.01", "1e-3", "3".
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw Error(ErrorCode::ConfigParse, "empty number");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw Error(ErrorCode::ConfigParse, "zero denominator in '" + text + "'");
        return num / den;
    }
    bool neg = false;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') {
        neg = s[i] == '-';
        ++i;
    }
    std::string digits;
    long scale = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) ++scale;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw Error(ErrorCode::ConfigParse, "not a number: '" + text + "'");
    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw Error(ErrorCode::ConfigParse, "not a number: '" + text + "'");
        std::size_t used = 0;
        try {
            exponent = std::stol(s.substr(i + 1), &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigParse, "bad exponent in '" + text + "'");
        }
        if (i + 1 + used != s.size()) throw Error(ErrorCode::ConfigParse, "trailing characters in '" + text + "'");
    }
    // A leading zero would select octal.
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    Rational value{BigInt(digits)};
    long shift = exponent - scale;
    BigInt ten_pow = mp::pow(BigInt(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
    if (shift >= 0)
        value *= Rational(ten_pow);
    else
        value /= Rational(ten_pow);
    return neg ? Rational(-value) : value;
}

inline BigFloat rational_to_bigfloat(const Rational& q) {
    BigFloat r;
    mpfr_set_q(r.backend().data(), q.backend().data(), MPFR_RNDN);
    return r;
}

inline Rational bigfloat_to_rational(const BigFloat& f) {
    Rational r;
    mpfr_get_q(r.backend().data(), f.backend().data());
    return r;
}

template <class T>
T from_rational(const Rational& q);
template <>
inline double from_rational<double>(const Rational& q) {
    return q.convert_to<double>();
}
template <>
inline Rational from_rational<Rational>(const Rational& q) {
    return q;
}
template <>
inline BigFloat from_rational<BigFloat>(const Rational& q) {
    return rational_to_bigfloat(q);
}

inline Rational to_rational(double v) { return Rational(v); }
inline Rational to_rational(const Rational& v) { return v; }
inline Rational to_rational(const BigFloat& v) { return bigfloat_to_rational(v); }

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.convert_to<double>(); }
inline double to_double(const BigFloat& v) { return v.convert_to<double>(); }

template <class T>
T ratio(long num, long den) {
    return from_rational<T>(Rational(num, den));
}

template <class T>
T absval(const T& x) {
    return x < T(0) ? T(-x) : x;
}

template <class T>
T ipow(T base, long n) {
    if (n < 0) return T(1) / ipow(base, -n);
    T result(1);
    while (n > 0) {
        if (n & 1) result *= base;
        base *= base;
        n >>= 1;
    }
    return result;
}

inline double exp_of(double x) { return std::exp(x); }
inline BigFloat exp_of(const BigFloat& x) { return mp::exp(x); }
inline Rational exp_of(const Rational& x) {
    PrecisionScope scope(rational_transcendental_bits());
    return bigfloat_to_rational(mp::exp(rational_to_bigfloat(x)));
}

inline double sqrt_of(double x) { return std::sqrt(x); }
inline BigFloat sqrt_of(const BigFloat& x) { return mp::sqrt(x); }
inline Rational sqrt_of(const Rational& x) {
    PrecisionScope scope(rational_transcendental_bits());
    return bigfloat_to_rational(mp::sqrt(rational_to_bigfloat(x)));
}

inline double log_of(double x) { return std::log(x); }
inline BigFloat log_of(const BigFloat& x) { return mp::log(x); }
inline Rational log_of(const Rational& x) {
    PrecisionScope scope(rational_transcendental_bits());
    return bigfloat_to_rational(mp::log(rational_to_bigfloat(x)));
}

inline double cos_of(double x) { return std::cos(x); }
inline BigFloat cos_of(const BigFloat& x) { return mp::cos(x); }
inline Rational cos_of(const Rational& x) {
    PrecisionScope scope(rational_transcendental_bits());
    return bigfloat_to_rational(mp::cos(rational_to_bigfloat(x)));
}

inline double sin_of(double x) { return std::sin(x); }
inline BigFloat sin_of(const BigFloat& x) { return mp::sin(x); }
inline Rational sin_of(const Rational& x) {
    PrecisionScope scope(rational_transcendental_bits());
    return bigfloat_to_rational(mp::sin(rational_to_bigfloat(x)));
}

// Relative resolution of the backend: 0 for exact arithmetic.
template <class T>
double relative_resolution();
template <>
inline double relative_resolution<double>() {
    return std::numeric_limits<double>::epsilon();
}
template <>
inline double relative_resolution<Rational>() {
    return 0.0;
}
template <>
inline double relative_resolution<BigFloat>() {
    return std::ldexp(1.0, -static_cast<int>(bigfloat_bits()));
}

// Mantissa bits available to the backend (0 = unbounded).
template <class T>
unsigned mantissa_bits();
template <>
inline unsigned mantissa_bits<double>() {
    return 53;
}
template <>
inline unsigned mantissa_bits<Rational>() {
    return 0;
}
template <>
inline unsigned mantissa_bits<BigFloat>() {
    return bigfloat_bits();
}

inline std::string format_double(double v, int digits = 17) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

// Exact text for rationals, decimal text otherwise.
inline std::string exact_string(const Rational& q) { return q.str(); }
inline std::string exact_string(double v) { return format_double(v); }
inline std::string exact_string(const BigFloat& v) { return v.str(0, std::ios_base::scientific); }

} // namespace hs
