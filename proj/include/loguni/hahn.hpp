#pragma once

// Finite Hahn series in one variable t with exponents in the value group:
// the concrete realization of the valuation center.  Each series carries a
// validity bound; terms beyond it are unknown, and arithmetic propagates
// the bound so that unreliable coefficients are never reported.

#include <map>
#include <utility>
#include <vector>

#include "loguni/algebraic.hpp"

namespace loguni {

class HahnSeries {
public:
    // (exponent, coefficient) pairs kept sorted by increasing real exponent.
    using Term = std::pair<Value, mpq_class>;

    HahnSeries() : validity_(Value::infinity()) {}
    explicit HahnSeries(Value validity) : validity_(std::move(validity)) {}

    static HahnSeries monomial(const Value& e, const mpq_class& c) {
        HahnSeries s;
        if (sgn(c) != 0) s.terms_.push_back({e, c});
        return s;
    }

    const std::vector<Term>& terms() const { return terms_; }
    std::vector<Term>& mut_terms() { return terms_; }
    const Value& validity() const { return validity_; }
    void set_validity(Value v) { validity_ = std::move(v); }
    bool empty() const { return terms_.empty(); }

    // empty support with infinite validity: the series is exactly zero
    bool known_zero() const { return terms_.empty() && validity_.is_infinity(); }

    const Value& leading_exponent() const {
        if (terms_.empty()) throw precondition_violated("leading exponent of empty Hahn series");
        return terms_.front().first;
    }
    const mpq_class& leading_coeff() const {
        if (terms_.empty()) throw precondition_violated("leading coefficient of empty Hahn series");
        return terms_.front().second;
    }

    void add_term(const BasisSpec& basis, const Value& e, const mpq_class& c) {
        if (sgn(c) == 0) return;
        for (size_t k = 0; k < terms_.size(); ++k) {
            auto ord = compare(e, terms_[k].first, basis);
            if (ord == std::strong_ordering::equal) {
                terms_[k].second += c;
                if (sgn(terms_[k].second) == 0) terms_.erase(terms_.begin() + k);
                return;
            }
            if (ord < 0) {
                terms_.insert(terms_.begin() + k, {e, c});
                return;
            }
        }
        terms_.push_back({e, c});
    }

    void truncate(const BasisSpec& basis) {
        while (!terms_.empty() && compare(terms_.back().first, validity_, basis) > 0)
            terms_.pop_back();
    }

    mpq_class coeff_at(const BasisSpec& basis, const Value& e) const {
        for (const auto& [ex, c] : terms_)
            if (compare(ex, e, basis) == std::strong_ordering::equal) return c;
        return 0;
    }

private:
    std::vector<Term> terms_;
    Value validity_;
};

inline HahnSeries hahn_add(const HahnSeries& a, const HahnSeries& b, const BasisSpec& basis) {
    HahnSeries out(compare(a.validity(), b.validity(), basis) <= 0 ? a.validity() : b.validity());
    for (const auto& [e, c] : a.terms()) out.add_term(basis, e, c);
    for (const auto& [e, c] : b.terms()) out.add_term(basis, e, c);
    out.truncate(basis);
    return out;
}

inline HahnSeries hahn_scal(const HahnSeries& a, const mpq_class& c) {
    HahnSeries out(a.validity());
    if (sgn(c) == 0) return out;
    for (const auto& [e, q] : a.terms()) out.mut_terms().push_back({e, q * c});
    return out;
}

inline HahnSeries hahn_shift(const HahnSeries& a, const Value& e) {
    // multiply by t^e; e may point downward (division by a monomial)
    HahnSeries out(a.validity().is_infinity() ? Value::infinity() : a.validity() + e);
    for (const auto& [ex, c] : a.terms()) out.mut_terms().push_back({ex + e, c});
    return out;
}

inline HahnSeries hahn_mul(const HahnSeries& a, const HahnSeries& b, const BasisSpec& basis) {
    // error(a)*lead(b) and error(b)*lead(a) limit what the product can certify
    Value validity = Value::infinity();
    if (!a.validity().is_infinity())
        validity = a.validity() + (b.empty() ? Value::zero(basis.rank()) : b.leading_exponent());
    if (!b.validity().is_infinity()) {
        Value vb = b.validity() + (a.empty() ? Value::zero(basis.rank()) : a.leading_exponent());
        validity = compare(validity, vb, basis) <= 0 ? validity : vb;
    }
    HahnSeries out(std::move(validity));
    for (const auto& [ea, ca] : a.terms())
        for (const auto& [eb, cb] : b.terms()) out.add_term(basis, ea + eb, ca * cb);
    out.truncate(basis);
    return out;
}

inline HahnSeries hahn_pow(const HahnSeries& a, int k, const BasisSpec& basis) {
    HahnSeries out = HahnSeries::monomial(Value::zero(basis.rank()), 1);
    for (int i = 0; i < k; ++i) out = hahn_mul(out, a, basis);
    return out;
}

// Inverse of a series with nonzero leading term.  The result is reliable up
// to the input's validity (shifted); an exact non-monomial input has an
// infinite inverse, so a finite result window must come from the caller.
inline HahnSeries hahn_invert(const HahnSeries& a, const BasisSpec& basis,
                              const Value* result_window = nullptr) {
    if (a.empty()) throw precondition_violated("cannot invert an empty Hahn series");
    const Value lead = a.leading_exponent();
    const mpq_class c0 = a.leading_coeff();
    // a = c0 t^lead (1 + m), m with positive exponents
    HahnSeries m = hahn_shift(hahn_scal(a, 1 / c0), lead.scaled(-1));
    HahnSeries one = HahnSeries::monomial(Value::zero(basis.rank()), 1);
    m = hahn_add(m, hahn_scal(one, -1), basis);

    Value window = m.validity();
    if (result_window && !result_window->is_infinity()) {
        Value w = *result_window + lead;
        if (window.is_infinity() || compare(w, window, basis) < 0) window = std::move(w);
    }
    if (window.is_infinity() && !m.empty())
        throw insufficient_precision("inverse of an exact non-monomial center needs a window");

    HahnSeries acc = one, pw = one;
    acc.set_validity(window);
    pw.set_validity(window);
    const int cap = 100000;
    int rounds = 0;
    while (!pw.empty()) {
        if (++rounds > cap) throw iteration_limit("hahn_invert failed to terminate");
        pw = hahn_mul(pw, hahn_scal(m, -1), basis);
        if (!window.is_infinity()) {
            pw.set_validity(window);
            pw.truncate(basis);
        }
        acc = hahn_add(acc, pw, basis);
    }
    acc = hahn_shift(acc, lead.scaled(-1));
    return hahn_scal(acc, 1 / c0);
}

} // namespace loguni
