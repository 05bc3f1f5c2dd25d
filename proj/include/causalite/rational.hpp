#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace causalite {

/// Exact rational value. All verification paths run on these; doubles are
/// confined to the alignment-search objective.
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

/// Exact conversion; every finite double is a dyadic rational.
inline Rat rat_from_double(double d) { return Rat(d); }

inline double rat_to_double(const Rat& r) { return r.get_d(); }

inline bool rat_is_boolean(const Rat& r) { return r == 0 || r == 1; }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

/// Canonical form: "p" for integers, "p/q" otherwise, q > 0, gcd(p,q)=1.
inline std::string rat_to_string(const Rat& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Accepts "p", "p/q" and plain decimals ("0.99" -> 99/100); all exact.
inline std::optional<Rat> rat_parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::string s(text);
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i >= s.size()) return std::nullopt;

    auto digits_only = [](std::string_view v) {
        if (v.empty()) return false;
        for (char c : v)
            if (c < '0' || c > '9') return false;
        return true;
    };

    std::string body = s.substr(i);
    std::size_t slash = body.find('/');
    std::size_t dot = body.find('.');
    Rat value;
    if (slash != std::string::npos) {
        std::string num = body.substr(0, slash);
        std::string den = body.substr(slash + 1);
        if (!digits_only(num) || !digits_only(den)) return std::nullopt;
        mpz_class n(num), d(den);
        if (d == 0) return std::nullopt;
        value = Rat(n, d);
        value.canonicalize();
    } else if (dot != std::string::npos) {
        std::string whole = body.substr(0, dot);
        std::string frac = body.substr(dot + 1);
        if (whole.empty()) whole = "0";
        if (!digits_only(whole) || (!frac.empty() && !digits_only(frac))) return std::nullopt;
        mpz_class n(whole);
        mpz_class scale = 1;
        for (char c : frac) {
            n = n * 10 + (c - '0');
            scale *= 10;
        }
        value = Rat(n, scale);
        value.canonicalize();
    } else {
        if (!digits_only(body)) return std::nullopt;
        value = Rat(mpz_class(body));
    }
    if (neg) value = -value;
    return value;
}

inline Rat rat_parse_or_throw(std::string_view text) {
    auto r = rat_parse(text);
    if (!r) throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
    return *r;
}

}  // namespace causalite
