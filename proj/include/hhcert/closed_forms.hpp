#pragma once

#include <stdexcept>
#include <vector>

#include "hhcert/rational.hpp"

namespace hhcert {

namespace detail {
inline void require_dim(int n) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
}
inline void require_nonneg(const Rational& s) {
    if (s < 0) throw std::domain_error("cut parameter must be nonnegative");
}
}  // namespace detail

/// Volume of the first-coordinate slab {c in the solid unit simplex, c^1 <= s}
/// as an exact rational: - sum_{i=1..n} (-s)^i / (i! (n-i)!).
/// At s = 1 this is the full simplex volume 1/n!.
inline Rational slab_volume(int n, const Rational& s) {
    detail::require_dim(n);
    detail::require_nonneg(s);
    Rational total = 0;
    for (int i = 1; i <= n; ++i) {
        const Rational coeff(BigInt(1), factorial(static_cast<unsigned>(i)) *
                                            factorial(static_cast<unsigned>(n - i)));
        total += coeff * rational_pow(-s, static_cast<unsigned>(i));
    }
    return -total;
}

/// First moment of c^1 over the same slab:
/// sum_{i=1..n} i (-s)^{i+1} / ((i+1)! (n-i)!). At s = 1 this is 1/(n+1)!.
inline Rational slab_first_moment(int n, const Rational& s) {
    detail::require_dim(n);
    detail::require_nonneg(s);
    Rational total = 0;
    for (int i = 1; i <= n; ++i) {
        const Rational coeff(BigInt(i), factorial(static_cast<unsigned>(i + 1)) *
                                            factorial(static_cast<unsigned>(n - i)));
        total += coeff * rational_pow(-s, static_cast<unsigned>(i + 1));
    }
    return total;
}

/// First moment of c^1 over the scaled solid simplex {c >= 0, sum c <= s}:
/// s^{n+1} / (n+1)!.
inline Rational scaled_simplex_first_moment(int n, const Rational& s) {
    detail::require_dim(n);
    detail::require_nonneg(s);
    return rational_pow(s, static_cast<unsigned>(n + 1)) /
           Rational(factorial(static_cast<unsigned>(n + 1)));
}

/// Exact integral of |c^1 - 1/n| over the solid unit simplex, assembled from
/// the slab pieces below and above the kink plus the substituted corner piece:
/// -J(1/n) + (1/n) I(1/n) + K(1 - 1/n).
inline Rational abs_deviation_integral(int n) {
    detail::require_dim(n);
    const Rational inv_n(BigInt(1), BigInt(n));
    return -slab_first_moment(n, inv_n) + inv_n * slab_volume(n, inv_n) +
           scaled_simplex_first_moment(n, Rational(1) - inv_n);
}

/// Contraction factor rho_n = n * n! * integral of |c^1 - 1/n|, the geometric
/// base of the decay bound; strictly below 1 for every n.
struct ContractionRecord {
    int n = 0;
    Rational deviation_integral;  // integral of |c^1 - 1/n|
    Rational rho;                 // n * n! * deviation_integral, exactly
    double decimal = 0.0;
};

/// Computes rho_n both from the decomposition above and from the expanded
/// binomial form
///   sum_{i=1..n} C(n,i) (i/(i+1)) (-1/n)^i - (1-1/n)^n + 1 + (1-1/n)^n (n-1)/(n+1)
/// and insists the two agree exactly.
inline ContractionRecord contraction_factor(int n) {
    detail::require_dim(n);
    ContractionRecord rec;
    rec.n = n;
    rec.deviation_integral = abs_deviation_integral(n);
    rec.rho = Rational(BigInt(n) * factorial(static_cast<unsigned>(n))) * rec.deviation_integral;

    const Rational inv_n(BigInt(1), BigInt(n));
    Rational expanded = 0;
    for (int i = 1; i <= n; ++i) {
        const Rational coeff(BigInt(i) * binomial(static_cast<unsigned>(n), static_cast<unsigned>(i)),
                             BigInt(i + 1));
        expanded += coeff * rational_pow(-inv_n, static_cast<unsigned>(i));
    }
    const Rational q = rational_pow(Rational(1) - inv_n, static_cast<unsigned>(n));
    expanded += -q + 1 + q * Rational(BigInt(n - 1), BigInt(n + 1));

    if (expanded != rec.rho)
        throw std::logic_error("contraction factor forms disagree; arithmetic bug");
    rec.decimal = to_double(rec.rho);
    return rec;
}

/// The alternating-sum tail comparison behind the rho_n < 1 argument: for
/// each i = 1..n-1 the ratio of consecutive term magnitudes,
/// ((i+1)/(i+2)) * ((n-i)/n) * (1/i), must be strictly below 1.
struct RatioWitness {
    int i = 0;
    Rational ratio;
};

struct AlternatingCheck {
    bool all_below_one = false;
    std::vector<RatioWitness> witnesses;
};

inline AlternatingCheck alternating_ratio_check(int n) {
    if (n < 2) throw std::domain_error("ratio check needs n >= 2");
    AlternatingCheck out;
    out.all_below_one = true;
    for (int i = 1; i <= n - 1; ++i) {
        const Rational ratio = Rational(BigInt(i + 1), BigInt(i + 2)) *
                               Rational(BigInt(n - i), BigInt(n)) * Rational(BigInt(1), BigInt(i));
        if (ratio >= 1) out.all_below_one = false;
        out.witnesses.push_back(RatioWitness{i, ratio});
    }
    return out;
}

}  // namespace hhcert
