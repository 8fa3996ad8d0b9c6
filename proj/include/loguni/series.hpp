#pragma once

// Truncated formal functions in k[[x,y]] with k = Q.  A series stores its
// finite support plus two precision bounds: terms whose x-part value exceeds
// x_value_bound, or whose total y-degree exceeds y_degree_bound, are unknown
// rather than zero.  Ring operations propagate bounds as conservative minima;
// substitution recomputes them from the full-value analysis so that dropped
// tails can never re-enter the represented window.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "loguni/frame.hpp"

namespace loguni {

constexpr int32_t kUnboundedDegree = std::numeric_limits<int32_t>::max();

struct Expo {
    std::vector<int32_t> xi;  // exponents of x_1..x_r
    std::vector<int32_t> yj;  // exponents of y_1..y_ny

    friend auto operator<=>(const Expo&, const Expo&) = default;

    int32_t ydeg() const {
        int32_t d = 0;
        for (int32_t e : yj) d += e;
        return d;
    }
    bool pure_x() const {
        for (int32_t e : yj)
            if (e != 0) return false;
        return true;
    }
};

class TruncatedSeries {
public:
    using TermMap = std::map<Expo, mpq_class>;

    TruncatedSeries() : xb_(Value::infinity()), yb_(kUnboundedDegree) {}
    TruncatedSeries(TermMap terms, Value xb, int32_t yb)
        : terms_(std::move(terms)), xb_(std::move(xb)), yb_(yb) {}

    static TruncatedSeries zero(const Frame& fr) {
        TruncatedSeries s;
        (void)fr;
        return s;
    }
    static TruncatedSeries constant(const Frame& fr, const mpq_class& c) {
        TruncatedSeries s;
        if (sgn(c) != 0) s.terms_[Expo{std::vector<int32_t>(fr.r, 0), std::vector<int32_t>(fr.ny, 0)}] = c;
        return s;
    }
    static TruncatedSeries monomial(const Frame& fr, std::vector<int32_t> I,
                                    std::vector<int32_t> J, const mpq_class& c) {
        TruncatedSeries s;
        I.resize(fr.r, 0);
        J.resize(fr.ny, 0);
        if (sgn(c) != 0) s.terms_[Expo{std::move(I), std::move(J)}] = c;
        return s;
    }

    const TermMap& terms() const { return terms_; }
    const Value& x_value_bound() const { return xb_; }
    int32_t y_degree_bound() const { return yb_; }
    bool is_zero() const { return terms_.empty(); }

    void set_bounds(Value xb, int32_t yb) {
        xb_ = std::move(xb);
        yb_ = yb;
    }

    void set_term(Expo e, const mpq_class& c) {
        if (sgn(c) == 0)
            terms_.erase(e);
        else
            terms_[std::move(e)] = c;
    }

    mpq_class coeff(const Expo& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? mpq_class(0) : it->second;
    }

    mpq_class constant_term(const Frame& fr) const {
        return coeff(Expo{std::vector<int32_t>(fr.r, 0), std::vector<int32_t>(fr.ny, 0)});
    }

    bool is_unit(const Frame& fr) const { return sgn(constant_term(fr)) != 0; }

    // Drops terms outside the represented window.
    void normalize(const Frame& fr) {
        for (auto it = terms_.begin(); it != terms_.end();) {
            bool drop = false;
            if (yb_ != kUnboundedDegree && it->first.ydeg() > yb_) drop = true;
            if (!drop && !xb_.is_infinity() &&
                fr.cmp(fr.monomial_value(it->first.xi), xb_) > 0)
                drop = true;
            it = drop ? terms_.erase(it) : std::next(it);
        }
    }

private:
    TermMap terms_;
    Value xb_;
    int32_t yb_;
};

inline int32_t min_deg(int32_t a, int32_t b) { return a < b ? a : b; }

inline TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b, const Frame& fr) {
    TruncatedSeries::TermMap t = a.terms();
    for (const auto& [e, c] : b.terms()) {
        auto [it, fresh] = t.emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (sgn(it->second) == 0) t.erase(it);
        }
    }
    TruncatedSeries out(std::move(t), fr.vmin(a.x_value_bound(), b.x_value_bound()),
                        min_deg(a.y_degree_bound(), b.y_degree_bound()));
    out.normalize(fr);
    return out;
}

inline TruncatedSeries neg(const TruncatedSeries& a) {
    TruncatedSeries::TermMap t = a.terms();
    for (auto& [e, c] : t) c = -c;
    return TruncatedSeries(std::move(t), a.x_value_bound(), a.y_degree_bound());
}

inline TruncatedSeries sub(const TruncatedSeries& a, const TruncatedSeries& b, const Frame& fr) {
    return add(a, neg(b), fr);
}

inline TruncatedSeries scal(const TruncatedSeries& a, const mpq_class& c) {
    if (sgn(c) == 0) {
        TruncatedSeries z;
        z.set_bounds(a.x_value_bound(), a.y_degree_bound());
        return z;
    }
    TruncatedSeries::TermMap t = a.terms();
    for (auto& [e, q] : t) q *= c;
    return TruncatedSeries(std::move(t), a.x_value_bound(), a.y_degree_bound());
}

inline TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b, const Frame& fr) {
    TruncatedSeries::TermMap t;
    for (const auto& [ea, ca] : a.terms()) {
        for (const auto& [eb, cb] : b.terms()) {
            Expo e = ea;
            for (size_t i = 0; i < e.xi.size(); ++i) e.xi[i] += eb.xi[i];
            for (size_t j = 0; j < e.yj.size(); ++j) e.yj[j] += eb.yj[j];
            auto [it, fresh] = t.emplace(std::move(e), ca * cb);
            if (!fresh) {
                it->second += ca * cb;
                if (sgn(it->second) == 0) t.erase(it);
            }
        }
    }
    TruncatedSeries out(std::move(t), fr.vmin(a.x_value_bound(), b.x_value_bound()),
                        min_deg(a.y_degree_bound(), b.y_degree_bound()));
    out.normalize(fr);
    return out;
}

// Multiplies by x^I y^J with I allowed to be negative only where division is exact.
inline TruncatedSeries shift_exponents(const TruncatedSeries& a, const std::vector<int32_t>& I,
                                       const std::vector<int32_t>& J, const Frame& fr) {
    TruncatedSeries::TermMap t;
    for (const auto& [e, c] : a.terms()) {
        Expo ne = e;
        for (size_t i = 0; i < ne.xi.size(); ++i) {
            ne.xi[i] += I[i];
            if (ne.xi[i] < 0) throw precondition_violated("monomial shift leaves the polynomial ring");
        }
        for (size_t j = 0; j < ne.yj.size(); ++j) {
            ne.yj[j] += J[j];
            if (ne.yj[j] < 0) throw precondition_violated("monomial shift leaves the polynomial ring");
        }
        t.emplace(std::move(ne), c);
    }
    Value shift = fr.monomial_value(I);
    Value xb = a.x_value_bound();
    if (!xb.is_infinity()) xb = xb + shift;
    int32_t yb = a.y_degree_bound();
    int32_t jd = 0;
    for (int32_t v : J) jd += v;
    if (yb != kUnboundedDegree) yb += jd;
    TruncatedSeries out(std::move(t), std::move(xb), yb);
    out.normalize(fr);
    return out;
}

// min over stored terms of nu(x^I); INFINITY for the (represented) zero.
inline Value explicit_value(const TruncatedSeries& f, const Frame& fr) {
    Value best = Value::infinity();
    for (const auto& [e, c] : f.terms()) {
        Value v = fr.monomial_value(e.xi);
        if (fr.lt(v, best)) best = std::move(v);
    }
    return best;
}

// False when the reported value could be beaten by unrepresented terms.
inline bool explicit_value_is_certain(const TruncatedSeries& f, const Frame& fr) {
    Value v = explicit_value(f, fr);
    if (f.x_value_bound().is_infinity() && f.y_degree_bound() == kUnboundedDegree) return true;
    if (v.is_infinity()) return false;
    return fr.lt(v, f.x_value_bound());
}

struct InitialForm {
    Value delta;
    TruncatedSeries terms;
    bool nonzero() const { return !terms.is_zero(); }
};

// Class of f modulo terms of strictly larger explicit value.
inline InitialForm initial_form(const TruncatedSeries& f, const Value& delta, const Frame& fr) {
    Value ev = explicit_value(f, fr);
    if (fr.cmp(delta, ev) > 0)
        throw precondition_violated("initial form requested above the explicit value");
    TruncatedSeries::TermMap t;
    for (const auto& [e, c] : f.terms())
        if (fr.eq(fr.monomial_value(e.xi), delta)) t.emplace(e, c);
    return InitialForm{delta, TruncatedSeries(std::move(t), f.x_value_bound(), f.y_degree_bound())};
}

enum class Finality { Dominant, Recessive, NotFinal };

struct FinalityResult {
    Finality kind;
    Value delta;  // the explicit value for Dominant verdicts

    bool is_final() const { return kind != Finality::NotFinal; }
};

// gamma-final test for a function: Recessive when nu_A(f) > gamma, Dominant
// when the initial form carries a pure-x term (unit cofactor in k[[y]]).
inline FinalityResult finality(const TruncatedSeries& f, const Value& gamma, const Frame& fr) {
    if (!f.x_value_bound().is_infinity() && fr.cmp(gamma, f.x_value_bound()) > 0)
        throw insufficient_precision("finality requested beyond the x-value window");
    Value delta = explicit_value(f, fr);
    if (fr.cmp(delta, gamma) > 0) return {Finality::Recessive, std::move(delta)};
    for (const auto& [e, c] : f.terms())
        if (e.pure_x() && fr.eq(fr.monomial_value(e.xi), delta))
            return {Finality::Dominant, std::move(delta)};
    return {Finality::NotFinal, std::move(delta)};
}

inline TruncatedSeries truncate_y_degree(const TruncatedSeries& f, int32_t yb, const Frame& fr) {
    TruncatedSeries out = f;
    out.set_bounds(f.x_value_bound(), min_deg(f.y_degree_bound(), yb));
    out.normalize(fr);
    return out;
}

inline TruncatedSeries truncate_x_value(const TruncatedSeries& f, const Value& xb, const Frame& fr) {
    TruncatedSeries out = f;
    out.set_bounds(fr.vmin(f.x_value_bound(), xb), f.y_degree_bound());
    out.normalize(fr);
    return out;
}

// Inverse of a unit, exact on the represented window.  The Neumann tail
// terminates because every non-constant term raises either the x-value or
// the y-degree; whichever direction is unbounded gets closed off by the
// default y-bound or the caller-provided x-window.
inline TruncatedSeries invert_unit(const TruncatedSeries& f, const Frame& fr,
                                   int32_t default_y_bound = 64,
                                   const Value* x_window = nullptr) {
    mpq_class c = f.constant_term(fr);
    if (sgn(c) == 0) throw not_a_unit("invert_unit needs a nonzero constant term");

    bool y_tail = false, x_tail = false;
    for (const auto& [e, q] : f.terms()) {
        if (e.pure_x() && !fr.monomial_value(e.xi).is_zero()) x_tail = true;
        if (e.ydeg() > 0 && fr.monomial_value(e.xi).is_zero()) y_tail = true;
    }
    int32_t yb = f.y_degree_bound();
    if (yb == kUnboundedDegree && y_tail) yb = default_y_bound;
    Value xb = f.x_value_bound();
    if (xb.is_infinity() && x_tail) {
        if (!x_window) throw insufficient_precision("invert_unit needs a finite x-value window");
        xb = *x_window;
    }

    TruncatedSeries g = scal(f, mpq_class(1) / c);  // 1 + m, m in the maximal ideal
    g.set_bounds(xb, yb);
    g.normalize(fr);
    g.set_term(Expo{std::vector<int32_t>(fr.r, 0), std::vector<int32_t>(fr.ny, 0)}, 0);
    TruncatedSeries acc = TruncatedSeries::constant(fr, 1);
    acc.set_bounds(xb, yb);
    TruncatedSeries pw = TruncatedSeries::constant(fr, 1);
    pw.set_bounds(xb, yb);
    const int cap = 100000;
    int k = 0;
    while (!pw.is_zero()) {
        if (++k > cap) throw iteration_limit("invert_unit failed to terminate");
        pw = mul(pw, g, fr);
        pw = scal(pw, -1);
        acc = add(acc, pw, fr);
    }
    return scal(acc, mpq_class(1) / c);
}

inline TruncatedSeries x_log_derivative(const TruncatedSeries& f, int i) {
    TruncatedSeries::TermMap t;
    for (const auto& [e, c] : f.terms())
        if (e.xi[i] != 0) t.emplace(e, c * e.xi[i]);
    return TruncatedSeries(std::move(t), f.x_value_bound(), f.y_degree_bound());
}

// d/dy_j; the y-window shrinks by one degree.
inline TruncatedSeries y_derivative(const TruncatedSeries& f, int j) {
    TruncatedSeries::TermMap t;
    for (const auto& [e, c] : f.terms()) {
        if (e.yj[j] == 0) continue;
        Expo ne = e;
        ne.yj[j] -= 1;
        t.emplace(std::move(ne), c * e.yj[j]);
    }
    int32_t yb = f.y_degree_bound();
    if (yb != kUnboundedDegree) yb = std::max<int32_t>(0, yb - 1);
    return TruncatedSeries(std::move(t), f.x_value_bound(), yb);
}

// Antiderivative in y_j (used by the Poincare primitives).
inline TruncatedSeries y_antiderivative(const TruncatedSeries& f, int j) {
    TruncatedSeries::TermMap t;
    for (const auto& [e, c] : f.terms()) {
        Expo ne = e;
        ne.yj[j] += 1;
        t.emplace(std::move(ne), c / (e.yj[j] + 1));
    }
    int32_t yb = f.y_degree_bound();
    if (yb != kUnboundedDegree) yb += 1;
    return TruncatedSeries(std::move(t), f.x_value_bound(), yb);
}

// Full value of a term: x-part value plus the weighted y-part, the quantity
// every allowed substitution can only increase.
inline Value full_term_value(const Expo& e, const Frame& fr) {
    Value acc = fr.monomial_value(e.xi);
    for (size_t j = 0; j < e.yj.size(); ++j) {
        if (e.yj[j] == 0) continue;
        if (fr.y_values[j].is_infinity()) return Value::infinity();
        acc = acc + fr.y_values[j].scaled(mpq_class(e.yj[j]));
    }
    return acc;
}

inline Value min_full_value(const TruncatedSeries& f, const Frame& fr) {
    Value best = Value::infinity();
    for (const auto& [e, c] : f.terms()) best = fr.vmin(best, full_term_value(e, fr));
    return best;
}

inline std::map<int32_t, TruncatedSeries> split_by_y_power(const TruncatedSeries& f, int j,
                                                           const Frame& fr) {
    std::map<int32_t, TruncatedSeries> out;
    for (const auto& [e, c] : f.terms()) {
        Expo ne = e;
        int32_t k = ne.yj[j];
        ne.yj[j] = 0;
        auto [it, fresh] = out.emplace(k, TruncatedSeries());
        if (fresh) it->second.set_bounds(f.x_value_bound(), f.y_degree_bound());
        it->second.set_term(std::move(ne), c);
    }
    (void)fr;
    return out;
}

// Substitutes y_j := s (a series over the *same* frame layout), y_j not
// occurring in s.  full_floor must be a positive lower bound for the full
// value of every term of s; x_goal is the x-window the caller wants to keep
// when the y-window of f is finite and tail pollution has to be priced.
inline TruncatedSeries subst_y(const TruncatedSeries& f, int j, const TruncatedSeries& s,
                               const Frame& fr, const Value& x_goal) {
    auto blocks = split_by_y_power(f, j, fr);
    int32_t kmax = blocks.empty() ? -1 : blocks.rbegin()->first;

    // Bounds first: they steer the truncation inside the Horner loop.
    Value xb = fr.vmin(f.x_value_bound(), s.x_value_bound());
    int32_t yb = min_deg(f.y_degree_bound(), s.y_degree_bound());
    if (f.y_degree_bound() != kUnboundedDegree) {
        // An unknown term of f with y_j-power k and residual degree t has
        // t + k > D; its image inside y-degree <= yb carries x-value at
        // least (D+1-yb)*full_floor.  Carve the rectangle under that line,
        // trading y-degree for the caller's x-window goal.
        const int32_t D = f.y_degree_bound();
        Value vs = min_full_value(s, fr);
        if (!vs.is_infinity() && !s.is_zero()) {
            if (fr.cmp(vs, fr.zero_value()) <= 0)
                throw precondition_violated("substitution series must sit in the maximal ideal");
            auto budget = [&](int32_t t) {
                return vs.scaled(mpq_class(2 * (D + 1 - t) - 1, 2));  // (D+1-t-1/2)*vs
            };
            int32_t t = std::min(yb, D);
            while (t > 0 && fr.lt(budget(t), x_goal)) --t;
            yb = t;
            xb = fr.vmin(xb, budget(yb));
        }
    }

    TruncatedSeries acc;
    acc.set_bounds(xb, yb);
    for (int32_t k = kmax; k >= 0; --k) {
        acc = mul(acc, s, fr);
        auto it = blocks.find(k);
        if (it != blocks.end()) acc = add(acc, it->second, fr);
        acc.set_bounds(xb, yb);
        acc.normalize(fr);
    }
    acc.set_bounds(xb, yb);
    acc.normalize(fr);
    return acc;
}

// Truncated exponential of a series without constant term.
inline TruncatedSeries exp_series(const TruncatedSeries& h, const Frame& fr,
                                  int32_t default_y_bound = 64,
                                  const Value* x_window = nullptr) {
    if (sgn(h.constant_term(fr)) != 0)
        throw precondition_violated("exp needs a zero constant term");

    bool y_tail = false, x_tail = false;
    for (const auto& [e, c] : h.terms()) {
        if (e.pure_x() && !fr.monomial_value(e.xi).is_zero()) x_tail = true;
        if (e.ydeg() > 0 && fr.monomial_value(e.xi).is_zero()) y_tail = true;
    }
    int32_t yb = h.y_degree_bound();
    if (yb == kUnboundedDegree && y_tail) yb = default_y_bound;
    Value xb = h.x_value_bound();
    if (xb.is_infinity() && x_tail) {
        if (!x_window) throw insufficient_precision("exp needs a finite x-value window");
        xb = *x_window;
    }

    TruncatedSeries g = h;
    g.set_bounds(xb, yb);
    g.normalize(fr);
    TruncatedSeries acc = TruncatedSeries::constant(fr, 1);
    acc.set_bounds(xb, yb);
    TruncatedSeries pw = TruncatedSeries::constant(fr, 1);
    pw.set_bounds(xb, yb);
    mpz_class fact = 1;
    const int cap = 100000;
    int k = 0;
    while (true) {
        if (++k > cap) throw iteration_limit("exp_series failed to terminate");
        pw = mul(pw, g, fr);
        if (pw.is_zero()) break;
        fact *= k;
        acc = add(acc, scal(pw, mpq_class(mpz_class(1), fact)), fr);
    }
    return acc;
}

} // namespace loguni
