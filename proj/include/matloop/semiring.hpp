#pragma once

// Commutative semirings. Each semiring is a small value type exposing
// zero/one/plus/times, equality, and text conversion of carrier values.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <regex>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/rational_adaptor.hpp>

#include "matloop/error.hpp"

namespace matloop {

namespace detail {

inline bool is_decimal_literal(std::string_view s) {
    static const std::regex re(R"(-?[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?)");
    return std::regex_match(s.begin(), s.end(), re);
}

inline double parse_double(std::string_view s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (!is_decimal_literal(s))
        throw Error(ErrorKind::ConstantNotInCarrier, "'" + std::string(s) + "' is not a number");
    return std::stod(std::string(s));
}

inline std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0) return "0";  // folds -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

struct RealSemiring {
    using value_type = double;
    static constexpr std::string_view name = "real";
    static constexpr bool exact = false;

    value_type zero() const { return 0.0; }
    value_type one() const { return 1.0; }
    value_type plus(value_type a, value_type b) const { return a + b; }
    value_type times(value_type a, value_type b) const { return a * b; }
    bool equal(value_type a, value_type b, double tol = 0) const {
        return a == b || std::fabs(a - b) <= tol;
    }
    bool is_zero(value_type a) const { return a == 0.0; }
    value_type divide(value_type a, value_type b) const {
        if (b == 0.0) throw Error(ErrorKind::DivisionByZero, "division by zero");
        return a / b;
    }
    value_type positive(value_type a) const { return a > 0.0 ? 1.0 : 0.0; }
    value_type parse(std::string_view s) const {
        double v = detail::parse_double(s);
        if (std::isinf(v))
            throw Error(ErrorKind::ConstantNotInCarrier, "inf is not a real number");
        return v;
    }
    std::string print(value_type a) const { return detail::format_double(a); }
};

namespace detail {
/// cpp_int reads a leading 0 as octal
inline std::string strip_zeros(std::string d) {
    d.erase(0, std::min(d.find_first_not_of('0'), d.size() - 1));
    return d;
}
}  // namespace detail

struct NatSemiring {
    using value_type = boost::multiprecision::cpp_int;
    static constexpr std::string_view name = "nat";
    static constexpr bool exact = true;

    value_type zero() const { return 0; }
    value_type one() const { return 1; }
    value_type plus(const value_type& a, const value_type& b) const { return a + b; }
    value_type times(const value_type& a, const value_type& b) const { return a * b; }
    bool equal(const value_type& a, const value_type& b, double = 0) const { return a == b; }
    bool is_zero(const value_type& a) const { return a.is_zero(); }
    value_type parse(std::string_view s) const {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos)
            throw Error(ErrorKind::ConstantNotInCarrier,
                        "'" + std::string(s) + "' is not a natural number");
        return value_type(detail::strip_zeros(std::string(s)));
    }
    std::string print(const value_type& a) const { return a.str(); }
};

struct BoolSemiring {
    // unsigned char rather than bool so that vectors of values stay addressable
    using value_type = unsigned char;
    static constexpr std::string_view name = "bool";
    static constexpr bool exact = true;

    value_type zero() const { return 0; }
    value_type one() const { return 1; }
    value_type plus(value_type a, value_type b) const { return a | b; }
    value_type times(value_type a, value_type b) const { return a & b; }
    bool equal(value_type a, value_type b, double = 0) const { return a == b; }
    bool is_zero(value_type a) const { return a == 0; }
    value_type parse(std::string_view s) const {
        if (s == "0" || s == "false") return 0;
        if (s == "1" || s == "true") return 1;
        throw Error(ErrorKind::ConstantNotInCarrier, "'" + std::string(s) + "' is not a boolean");
    }
    std::string print(value_type a) const { return a ? "1" : "0"; }
};

/// min-plus over the reals extended with +inf.
struct TropicalSemiring {
    using value_type = double;
    static constexpr std::string_view name = "tropical";
    static constexpr bool exact = true;

    value_type zero() const { return std::numeric_limits<double>::infinity(); }
    value_type one() const { return 0.0; }
    value_type plus(value_type a, value_type b) const { return a < b ? a : b; }
    value_type times(value_type a, value_type b) const {
        if (std::isinf(a) || std::isinf(b)) return zero();
        return a + b;
    }
    bool equal(value_type a, value_type b, double = 0) const { return a == b; }
    bool is_zero(value_type a) const { return std::isinf(a); }
    value_type parse(std::string_view s) const { return detail::parse_double(s); }
    std::string print(value_type a) const { return detail::format_double(a); }
};

/// Exact rationals. Decimal literals are read exactly ("0.1" is 1/10);
/// "p/q" is accepted as well.
struct RationalSemiring {
    using value_type = boost::multiprecision::cpp_rational;
    static constexpr std::string_view name = "rational";
    static constexpr bool exact = true;

    value_type zero() const { return 0; }
    value_type one() const { return 1; }
    value_type plus(const value_type& a, const value_type& b) const { return a + b; }
    value_type times(const value_type& a, const value_type& b) const { return a * b; }
    bool equal(const value_type& a, const value_type& b, double = 0) const { return a == b; }
    bool is_zero(const value_type& a) const { return a == 0; }
    value_type divide(const value_type& a, const value_type& b) const {
        if (b == 0) throw Error(ErrorKind::DivisionByZero, "division by zero");
        return a / b;
    }
    value_type positive(const value_type& a) const { return a > 0 ? 1 : 0; }
    value_type parse(std::string_view s) const {
        using boost::multiprecision::cpp_int;
        static const std::regex frac(R"((-?[0-9]+)/([0-9]+))");
        static const std::regex dec(R"((-?)([0-9]+)(?:\.([0-9]+))?(?:[eE]([+-]?[0-9]+))?)");
        std::string t(s);
        std::smatch m;
        if (std::regex_match(t, m, frac)) {
            cpp_int q(detail::strip_zeros(m[2].str()));
            if (q == 0) throw Error(ErrorKind::ConstantNotInCarrier, "'" + t + "' has a zero denominator");
            const std::string p = m[1].str();
            cpp_int num(detail::strip_zeros(p[0] == '-' ? p.substr(1) : p));
            return value_type(p[0] == '-' ? cpp_int(-num) : num, q);
        }
        if (!std::regex_match(t, m, dec))
            throw Error(ErrorKind::ConstantNotInCarrier, "'" + t + "' is not a rational number");
        std::string digits = detail::strip_zeros(m[2].str() + m[3].str());
        long exp10 = -static_cast<long>(m[3].length());
        if (m[4].matched) {
            if (m[4].length() > 6) throw Error(ErrorKind::ConstantNotInCarrier, "exponent of '" + t + "' is too large");
            exp10 += std::stol(m[4].str());
        }
        cpp_int num(digits), den = 1;
        cpp_int ten_pow = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
        if (exp10 < 0) den = ten_pow;
        else num *= ten_pow;
        value_type v(num, den);
        return m[1].length() ? value_type(-v) : v;
    }
    std::string print(const value_type& a) const {
        if (denominator(a) == 1) return numerator(a).str();
        return numerator(a).str() + "/" + denominator(a).str();
    }
};

enum class SemiringKind { Real, Nat, Bool, Tropical, Rational };

inline SemiringKind parse_semiring_kind(std::string_view s) {
    if (s == "real") return SemiringKind::Real;
    if (s == "nat") return SemiringKind::Nat;
    if (s == "bool") return SemiringKind::Bool;
    if (s == "tropical") return SemiringKind::Tropical;
    if (s == "rational") return SemiringKind::Rational;
    throw Error(ErrorKind::FormatError, "unknown semiring '" + std::string(s) + "'");
}

inline std::string_view to_string(SemiringKind k) {
    switch (k) {
    case SemiringKind::Real: return RealSemiring::name;
    case SemiringKind::Nat: return NatSemiring::name;
    case SemiringKind::Bool: return BoolSemiring::name;
    case SemiringKind::Tropical: return TropicalSemiring::name;
    case SemiringKind::Rational: return RationalSemiring::name;
    }
    return "?";
}

/// Runs f with a default-constructed semiring object of the given kind.
template <class F>
decltype(auto) with_semiring(SemiringKind k, F&& f) {
    switch (k) {
    case SemiringKind::Nat: return f(NatSemiring{});
    case SemiringKind::Bool: return f(BoolSemiring{});
    case SemiringKind::Tropical: return f(TropicalSemiring{});
    case SemiringKind::Rational: return f(RationalSemiring{});
    case SemiringKind::Real: break;
    }
    return f(RealSemiring{});
}

}  // namespace matloop
