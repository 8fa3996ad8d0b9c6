#pragma once

// Exact representation of the rank-one value group: a Q-basis of positive
// reals given as algebraic numbers with isolating intervals, and values as
// rational coordinate vectors over that basis.  Comparisons run interval
// refinement until the sign is decided; a budget turns a false independence
// declaration into a diagnosable error.

#include <gmpxx.h>

#include <compare>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "loguni/errors.hpp"
#include "loguni/rational.hpp"

namespace loguni {

struct Interval {
    mpq_class lo, hi;
    bool is_point() const { return lo == hi; }
    mpq_class mid() const { return (lo + hi) / 2; }
};

inline Interval operator+(const Interval& a, const Interval& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}

inline Interval scale(const mpq_class& c, const Interval& iv) {
    if (sgn(c) >= 0) return {c * iv.lo, c * iv.hi};
    return {c * iv.hi, c * iv.lo};
}

class AlgebraicReal {
public:
    // minpoly: integer coefficients, ascending degree; (lo,hi) isolates one
    // positive root.  Uniqueness of the root is the caller's declaration,
    // but the sign change and positivity are checked.
    AlgebraicReal(std::vector<mpz_class> minpoly, mpq_class lo, mpq_class hi)
        : poly_(std::move(minpoly)), iv_{std::move(lo), std::move(hi)} {
        if (poly_.empty()) throw malformed_input("empty minimal polynomial");
        if (iv_.lo > iv_.hi) throw malformed_input("inverted isolating interval");
        if (sgn(iv_.lo) < 0) throw malformed_input("isolating interval must stay positive");
        if (iv_.is_point()) {
            exact_ = true;
            return;
        }
        int slo = sign_at(iv_.lo), shi = sign_at(iv_.hi);
        if (slo == 0) { iv_.hi = iv_.lo; exact_ = true; return; }
        if (shi == 0) { iv_.lo = iv_.hi; exact_ = true; return; }
        if (slo == shi)
            throw malformed_input("isolating interval carries no sign change");
    }

    static AlgebraicReal from_rational(const mpq_class& q) {
        if (sgn(q) <= 0) throw malformed_input("basis values must be positive");
        // root of q.den*t - q.num
        std::vector<mpz_class> p{-q.get_num(), q.get_den()};
        return AlgebraicReal(std::move(p), q, q);
    }

    bool exact() const { return exact_; }
    const mpq_class& exact_value() const { return iv_.lo; }
    const Interval& interval() const { return iv_; }
    const std::vector<mpz_class>& minpoly() const { return poly_; }

    // Sign of the minimal polynomial at a rational point, computed exactly.
    int sign_at(const mpq_class& q) const {
        const mpz_class& a = q.get_num();
        const mpz_class& b = q.get_den();
        mpz_class acc = 0, apow = 1;
        std::vector<mpz_class> bpow(poly_.size());
        bpow[poly_.size() - 1] = 1;
        for (size_t k = poly_.size() - 1; k-- > 0;) bpow[k] = bpow[k + 1] * b;
        for (size_t k = 0; k < poly_.size(); ++k) {
            acc += poly_[k] * apow * bpow[k];
            apow *= a;
        }
        return sgn(acc);
    }

    // One bisection step; returns a new interval, the stored one is untouched.
    Interval refined(const Interval& iv) const {
        if (iv.is_point()) return iv;
        mpq_class m = iv.mid();
        int sm = sign_at(m);
        if (sm == 0) return {m, m};
        if (sm == sign_at(iv.lo)) return {m, iv.hi};
        return {iv.lo, m};
    }

private:
    std::vector<mpz_class> poly_;
    Interval iv_;
    bool exact_ = false;
};

struct BasisSpec {
    std::vector<AlgebraicReal> basis_values;
    int refinement_budget = 256;

    int rank() const { return static_cast<int>(basis_values.size()); }

    // Shared, monotonically narrowing enclosures; refinement only ever
    // tightens them, so comparisons can start from the best known state.
    std::vector<Interval> cache_snapshot() const {
        std::lock_guard<std::mutex> lk(mu_);
        if (cache_.size() != basis_values.size()) {
            cache_.clear();
            for (const auto& a : basis_values) cache_.push_back(a.interval());
        }
        return cache_;
    }
    void cache_refine(const std::vector<bool>& which, int rounds) const {
        std::lock_guard<std::mutex> lk(mu_);
        if (cache_.size() != basis_values.size()) {
            cache_.clear();
            for (const auto& a : basis_values) cache_.push_back(a.interval());
        }
        for (size_t i = 0; i < cache_.size(); ++i) {
            if (!which[i]) continue;
            for (int k = 0; k < rounds && !cache_[i].is_point(); ++k)
                cache_[i] = basis_values[i].refined(cache_[i]);
        }
    }

private:
    mutable std::vector<Interval> cache_;
    mutable std::mutex mu_;
};

// An element of the value group, or the absorbing element INFINITY that
// represents the value of 0.
class Value {
public:
    Value() = default;
    explicit Value(std::vector<mpq_class> coeffs) : c_(std::move(coeffs)) {}

    static Value infinity() {
        Value v;
        v.inf_ = true;
        return v;
    }
    static Value zero(int r) { return Value(std::vector<mpq_class>(r)); }

    bool is_infinity() const { return inf_; }
    int dim() const { return static_cast<int>(c_.size()); }
    const std::vector<mpq_class>& coeffs() const { return c_; }

    bool is_zero() const {
        if (inf_) return false;
        for (const auto& q : c_)
            if (sgn(q) != 0) return false;
        return true;
    }

    friend bool operator==(const Value& a, const Value& b) {
        if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
        return a.c_ == b.c_;
    }

    friend Value operator+(const Value& a, const Value& b) {
        if (a.inf_ || b.inf_) return infinity();
        Value out = a;
        for (size_t i = 0; i < out.c_.size(); ++i) out.c_[i] += b.c_[i];
        return out;
    }

    friend Value operator-(const Value& a, const Value& b) {
        if (b.inf_) throw precondition_violated("cannot subtract INFINITY");
        if (a.inf_) return infinity();
        Value out = a;
        for (size_t i = 0; i < out.c_.size(); ++i) out.c_[i] -= b.c_[i];
        return out;
    }

    Value scaled(const mpq_class& s) const {
        if (inf_) {
            if (sgn(s) <= 0) throw precondition_violated("cannot scale INFINITY by nonpositive factor");
            return infinity();
        }
        Value out = *this;
        for (auto& q : out.c_) q *= s;
        return out;
    }

private:
    bool inf_ = false;
    std::vector<mpq_class> c_;
};

namespace detail {

inline Interval value_interval(const Value& v, const std::vector<Interval>& ivs) {
    Interval acc{0, 0};
    for (size_t i = 0; i < v.coeffs().size(); ++i) {
        if (sgn(v.coeffs()[i]) == 0) continue;
        acc = acc + scale(v.coeffs()[i], ivs[i]);
    }
    return acc;
}

} // namespace detail

// Total order on the value group via the declared real embedding.
inline std::strong_ordering compare(const Value& v, const Value& w, const BasisSpec& basis) {
    if (v.is_infinity() && w.is_infinity()) return std::strong_ordering::equal;
    if (v.is_infinity()) return std::strong_ordering::greater;
    if (w.is_infinity()) return std::strong_ordering::less;
    Value d = v - w;
    if (d.is_zero()) return std::strong_ordering::equal;

    // exact part of the sum, plus the indices that need enclosures
    mpq_class exact = 0;
    std::vector<bool> pending(basis.basis_values.size(), false);
    bool any_pending = false;
    for (size_t i = 0; i < basis.basis_values.size(); ++i) {
        if (sgn(d.coeffs()[i]) == 0) continue;
        if (basis.basis_values[i].exact()) {
            exact += d.coeffs()[i] * basis.basis_values[i].exact_value();
        } else {
            pending[i] = true;
            any_pending = true;
        }
    }
    if (!any_pending) {
        int s = sgn(exact);
        if (s > 0) return std::strong_ordering::greater;
        if (s < 0) return std::strong_ordering::less;
        throw refinement_budget_exceeded(
            "distinct coefficient vectors give an exactly zero real: "
            "declared Q-independence is violated");
    }

    int spent = 0, step = 2;
    while (spent <= basis.refinement_budget) {
        std::vector<Interval> ivs = basis.cache_snapshot();
        Interval acc{exact, exact};
        for (size_t i = 0; i < ivs.size(); ++i)
            if (pending[i]) acc = acc + scale(d.coeffs()[i], ivs[i]);
        if (sgn(acc.lo) > 0) return std::strong_ordering::greater;
        if (sgn(acc.hi) < 0) return std::strong_ordering::less;
        basis.cache_refine(pending, step);
        spent += step;
        step *= 2;
    }
    throw refinement_budget_exceeded(
        "interval refinement budget exceeded while comparing values "
        "(suspect a violated independence declaration)");
}

// Coordinates of nu(x^I) over the basis itself: the exponent vector.
inline Value monomial_value(const std::vector<int32_t>& I, const BasisSpec& basis) {
    if (static_cast<int>(I.size()) != basis.rank())
        throw precondition_violated("exponent length does not match basis rank");
    std::vector<mpq_class> c(I.size());
    for (size_t i = 0; i < I.size(); ++i) c[i] = I[i];
    return Value(std::move(c));
}

// Rational enclosure of the real number a Value denotes, refined `rounds` times.
inline Interval value_enclosure(const Value& v, const BasisSpec& basis, int rounds = 16) {
    if (v.is_infinity()) throw precondition_violated("INFINITY has no enclosure");
    std::vector<Interval> ivs;
    for (const auto& a : basis.basis_values) {
        Interval iv = a.interval();
        for (int k = 0; k < rounds && !iv.is_point(); ++k) iv = a.refined(iv);
        ivs.push_back(iv);
    }
    return detail::value_interval(v, ivs);
}

} // namespace loguni
