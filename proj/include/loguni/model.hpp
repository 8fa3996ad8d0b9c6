#pragma once

// Locally parameterized models: the parameter frame, the Hahn-series center
// realizing the valuation, the three elementary allowed transformations
// (coordinate changes, independent blow-ups, Puiseux packages), pullback of
// series and 1-forms, and monomial principalization.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loguni/forms.hpp"
#include "loguni/hahn.hpp"
#include "loguni/series.hpp"

namespace loguni {

// ---------------------------------------------------------------- matrices

using MatZ = std::vector<std::vector<mpz_class>>;
using MatQ = std::vector<std::vector<mpq_class>>;

inline MatZ identity_z(int n) {
    MatZ m(n, std::vector<mpz_class>(n, 0));
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline MatZ mul_z(const MatZ& a, const MatZ& b) {
    int n = static_cast<int>(a.size());
    MatZ out(n, std::vector<mpz_class>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

inline mpq_class det_q(MatQ m) {
    int n = static_cast<int>(m.size());
    mpq_class det = 1;
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int rr = c; rr < n; ++rr)
            if (sgn(m[rr][c]) != 0) { piv = rr; break; }
        if (piv < 0) return 0;
        if (piv != c) { std::swap(m[piv], m[c]); det = -det; }
        det *= m[c][c];
        for (int rr = c + 1; rr < n; ++rr) {
            if (sgn(m[rr][c]) == 0) continue;
            mpq_class f = m[rr][c] / m[c][c];
            for (int cc = c; cc < n; ++cc) m[rr][cc] -= f * m[c][cc];
        }
    }
    return det;
}

inline mpz_class det_z(const MatZ& m) {
    MatQ q(m.size());
    for (size_t i = 0; i < m.size(); ++i)
        for (const auto& e : m[i]) q[i].push_back(mpq_class(e));
    mpq_class d = det_q(std::move(q));
    return d.get_num();
}

// Solves x * M = v (row vector convention) by Gaussian elimination.
inline std::vector<mpq_class> solve_row_system(MatQ M, std::vector<mpq_class> v) {
    int n = static_cast<int>(M.size());
    // transpose to the column problem M^T x^T = v^T
    MatQ a(n, std::vector<mpq_class>(n + 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = M[j][i];
        a[i][n] = v[i];
    }
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int rr = c; rr < n; ++rr)
            if (sgn(a[rr][c]) != 0) { piv = rr; break; }
        if (piv < 0) throw precondition_violated("singular system in value-group solve");
        std::swap(a[piv], a[c]);
        mpq_class p = a[c][c];
        for (int cc = c; cc <= n; ++cc) a[c][cc] /= p;
        for (int rr = 0; rr < n; ++rr) {
            if (rr == c || sgn(a[rr][c]) == 0) continue;
            mpq_class f = a[rr][c];
            for (int cc = c; cc <= n; ++cc) a[rr][cc] -= f * a[c][cc];
        }
    }
    std::vector<mpq_class> x(n);
    for (int i = 0; i < n; ++i) x[i] = a[i][n];
    return x;
}

inline MatQ invert_q(const MatZ& m) {
    int n = static_cast<int>(m.size());
    MatQ a(n, std::vector<mpq_class>(2 * n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = mpq_class(m[i][j]);
        a[i][n + i] = 1;
    }
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int rr = c; rr < n; ++rr)
            if (sgn(a[rr][c]) != 0) { piv = rr; break; }
        if (piv < 0) throw precondition_violated("singular matrix inversion");
        std::swap(a[piv], a[c]);
        mpq_class p = a[c][c];
        for (int cc = 0; cc < 2 * n; ++cc) a[c][cc] /= p;
        for (int rr = 0; rr < n; ++rr) {
            if (rr == c || sgn(a[rr][c]) == 0) continue;
            mpq_class f = a[rr][c];
            for (int cc = 0; cc < 2 * n; ++cc) a[rr][cc] -= f * a[c][cc];
        }
    }
    MatQ out(n, std::vector<mpq_class>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i][j] = a[i][n + j];
    return out;
}

// ------------------------------------------------------------------ center

struct Center {
    std::vector<HahnSeries> x_assign;  // x_i(t); t^{nu(x_i)} until a ramified step
    std::vector<HahnSeries> y_assign;  // psi_j(t)
};

// ------------------------------------------------------- transform records

struct Frame;  // from frame.hpp

enum class StepKind { CoordChange, Blowup, CombA, CombB, Translate };

struct ElemStep {
    StepKind kind;
    int l = -1;         // dependent index for CoordChange/CombA/CombB/Translate
    int i = -1, j = -1; // independent indices
    TruncatedSeries shift;  // CoordChange: y_l' = y_l + shift
    mpq_class lambda;       // Translate
    Frame before, after;    // frames on both sides, for replayable pullbacks
};

enum class RecordKind { CoordinateChange, IndependentBlowup, PuiseuxPackage };

struct TransformRecord {
    RecordKind kind;
    int l = -1, i = -1, j = -1;
    TruncatedSeries shift;      // coordinate change data
    MatZ B, C;                  // Puiseux package matrices
    long d = 1;
    std::vector<mpz_class> p;
    mpq_class lambda;
    std::vector<ElemStep> steps;
};

// ------------------------------------------------------------------- model

struct ParamModel {
    Frame frame;
    Center center;
    std::vector<TransformRecord> history;
    Value precision_goal;       // x-window defended when windows must shrink
    Value hahn_window;          // t-order cap for center arithmetic
    int32_t y_bound_default = 32;

    const BasisSpec& basis() const { return *frame.basis; }
};

inline Value y_value_floor(const HahnSeries& psi) {
    if (!psi.empty()) return psi.leading_exponent();
    return psi.validity();  // INFINITY for a known-zero assignment
}

inline void refresh_y_values(ParamModel& m) {
    for (int j = 0; j < m.frame.ny; ++j) m.frame.y_values[j] = y_value_floor(m.center.y_assign[j]);
}

inline ParamModel make_model(std::shared_ptr<const BasisSpec> basis, int ny,
                             std::vector<HahnSeries> y_assign,
                             std::vector<std::string> x_names = {},
                             std::vector<std::string> y_names = {}) {
    ParamModel m;
    m.frame = make_frame(std::move(basis), ny, std::move(x_names), std::move(y_names));
    m.precision_goal = m.frame.zero_value();
    m.hahn_window = Value::infinity();
    m.center.x_assign.reserve(m.frame.r);
    for (int i = 0; i < m.frame.r; ++i)
        m.center.x_assign.push_back(HahnSeries::monomial(m.frame.x_values[i], 1));
    if (static_cast<int>(y_assign.size()) != ny)
        throw malformed_input("center must assign every dependent parameter");
    m.center.y_assign = std::move(y_assign);
    for (auto& psi : m.center.y_assign) {
        psi.truncate(m.basis());
        for (size_t k = 0; k + 1 < psi.terms().size(); ++k)
            if (compare(psi.terms()[k].first, psi.terms()[k + 1].first, m.basis()) >= 0)
                throw malformed_input("center exponents must increase strictly");
        if (!psi.empty() && compare(psi.leading_exponent(), Value::zero(m.basis().rank()), m.basis()) <= 0)
            throw malformed_input("center exponents must be positive");
        if (!psi.empty() && !psi.validity().is_infinity() &&
            compare(psi.validity(), psi.terms().back().first, m.basis()) < 0)
            throw malformed_input("validity bound below the last stored exponent");
    }
    refresh_y_values(m);
    return m;
}

// --------------------------------------------------------- nu via the center

// t-order of f along the center; INFINITY only when everything in sight is
// exact and the evaluation is exactly zero.
inline Value nu(const TruncatedSeries& f, const ParamModel& m) {
    const auto& basis = m.basis();
    const Frame& fr = m.frame;
    if (f.is_zero() && f.x_value_bound().is_infinity() && f.y_degree_bound() == kUnboundedDegree)
        return Value::infinity();

    HahnSeries acc;  // zero, validity INFINITY
    for (const auto& [e, c] : f.terms()) {
        HahnSeries prod = HahnSeries::monomial(Value::zero(basis.rank()), c);
        for (int i = 0; i < fr.r; ++i)
            if (e.xi[i] != 0) prod = hahn_mul(prod, hahn_pow(m.center.x_assign[i], e.xi[i], basis), basis);
        for (int j = 0; j < fr.ny; ++j) {
            if (e.yj[j] == 0) continue;
            const HahnSeries& psi = m.center.y_assign[j];
            if (psi.known_zero()) { prod = HahnSeries(); prod.set_validity(Value::infinity()); break; }
            if (psi.empty())
                throw insufficient_precision("center gives no information on " + fr.y_names[j]);
            prod = hahn_mul(prod, hahn_pow(psi, e.yj[j], basis), basis);
        }
        acc = hahn_add(acc, prod, basis);
    }

    Value cap = acc.validity();
    if (!f.x_value_bound().is_infinity()) cap = fr.vmin(cap, f.x_value_bound());
    if (f.y_degree_bound() != kUnboundedDegree) {
        Value floor = Value::infinity();
        for (int j = 0; j < fr.ny; ++j) floor = fr.vmin(floor, fr.y_values[j]);
        if (!floor.is_infinity())
            cap = fr.vmin(cap, floor.scaled(mpq_class(f.y_degree_bound() + 1)));
    }

    if (!acc.empty() && fr.le(acc.leading_exponent(), cap)) return acc.leading_exponent();
    if (acc.empty() && cap.is_infinity()) return Value::infinity();
    throw insufficient_precision("all terms cancel within the validity window");
}

// nu(y_l), guarded: distinguishes exhausted centers from truncated ones.
inline Value nu_of_dependent(const ParamModel& m, int l) {
    const HahnSeries& psi = m.center.y_assign[l];
    if (!psi.empty()) return psi.leading_exponent();
    if (psi.known_zero()) return Value::infinity();
    throw insufficient_precision("center for " + m.frame.y_names[l] + " is exhausted");
}

// ------------------------------------------------- elementary step pullback

namespace detail {

// Rebalances a rectangle window when term values can drop by `drop` per unit
// of a y-degree increment (ramified combinatorial steps).
inline void rebalance_drop(Value& xb, int32_t& yb, const Value& drop, const Frame& fr,
                           const Value& goal, int32_t yb_default) {
    if (xb.is_infinity()) return;
    if (yb == kUnboundedDegree) yb = yb_default;
    int32_t t = yb;
    while (t > 0 && fr.lt(xb - drop.scaled(mpq_class(t)), goal)) --t;
    yb = t;
    xb = xb - drop.scaled(mpq_class(yb));
}

} // namespace detail

inline TruncatedSeries transform_series_step(const TruncatedSeries& f, const ElemStep& st,
                                             const Value& goal, int32_t yb_default) {
    const Frame& fa = st.after;
    switch (st.kind) {
        case StepKind::Blowup: {
            // x_j = x_i' x_j'
            TruncatedSeries::TermMap t;
            for (const auto& [e, c] : f.terms()) {
                Expo ne = e;
                ne.xi[st.i] += ne.xi[st.j];
                t.emplace(std::move(ne), c);
            }
            TruncatedSeries out(std::move(t), f.x_value_bound(), f.y_degree_bound());
            out.normalize(fa);
            return out;
        }
        case StepKind::CombA: {
            // y_l = x_i' y_l'
            TruncatedSeries::TermMap t;
            for (const auto& [e, c] : f.terms()) {
                Expo ne = e;
                ne.xi[st.i] += ne.yj[st.l];
                t.emplace(std::move(ne), c);
            }
            TruncatedSeries out(std::move(t), f.x_value_bound(), f.y_degree_bound());
            out.normalize(fa);
            return out;
        }
        case StepKind::CombB: {
            // x_i = x_i' y_l'
            TruncatedSeries::TermMap t;
            for (const auto& [e, c] : f.terms()) {
                Expo ne = e;
                ne.yj[st.l] += ne.xi[st.i];
                t.emplace(std::move(ne), c);
            }
            Value xb = f.x_value_bound();
            int32_t yb = f.y_degree_bound();
            // values drop by nu(y_l) per unit of old x_i-exponent
            detail::rebalance_drop(xb, yb, st.before.y_values[st.l], fa, goal, yb_default);
            TruncatedSeries out(std::move(t), std::move(xb), yb);
            out.normalize(fa);
            return out;
        }
        case StepKind::Translate: {
            // y_l = x_i (y_l' + lambda)
            TruncatedSeries s = TruncatedSeries::monomial(
                fa, [&] { std::vector<int32_t> I(fa.r, 0); I[st.i] = 1; return I; }(),
                std::vector<int32_t>(fa.ny, 0), st.lambda);
            TruncatedSeries lin = TruncatedSeries::monomial(
                fa, [&] { std::vector<int32_t> I(fa.r, 0); I[st.i] = 1; return I; }(),
                [&] { std::vector<int32_t> J(fa.ny, 0); J[st.l] = 1; return J; }(), 1);
            s = add(s, lin, fa);
            return subst_y(f, st.l, s, fa, goal);
        }
        case StepKind::CoordChange: {
            // y_l = y_l' - shift (shift lives in x, y_<l: same exponents)
            TruncatedSeries s = TruncatedSeries::monomial(
                fa, std::vector<int32_t>(fa.r, 0),
                [&] { std::vector<int32_t> J(fa.ny, 0); J[st.l] = 1; return J; }(), 1);
            s = sub(s, st.shift, fa);
            return subst_y(f, st.l, s, fa, goal);
        }
    }
    throw impossible_branch("unknown step kind");
}

// 1-form pullback.  Inside a Puiseux package the l-th dependent symbol is
// carried log-style (dy_l/y_l) so the intermediate charts stay polynomial;
// entry multiplies the dy_l coefficient by y_l, the translation at the end
// converts back with the unit 1/(y_l' + lambda).
struct ExtendedForm {
    LogForm form;   // degree 1; key r+l means dy_l/y_l while log_slot == l
    int log_slot = -1;
};

inline ExtendedForm transform_form_step(const ExtendedForm& w, const ElemStep& st,
                                        const Value& goal, int32_t yb_default) {
    const Frame& fa = st.after;
    ExtendedForm out;
    out.log_slot = w.log_slot;
    out.form = LogForm(1);
    const int r = fa.r;

    auto pull = [&](const TruncatedSeries& c) {
        return transform_series_step(c, st, goal, yb_default);
    };

    for (const auto& [key, coeff] : w.form.coeffs()) {
        int sym = key[0];
        TruncatedSeries c = pull(coeff);
        if (c.is_zero()) continue;
        switch (st.kind) {
            case StepKind::Blowup:
                out.form.add_coeff(key, c, fa);
                if (sym == st.j) out.form.add_coeff(FormKey{st.i}, c, fa);
                break;
            case StepKind::CombA:
                // dy_l/y_l -> dx_i/x_i + dy_l'/y_l'
                out.form.add_coeff(key, c, fa);
                if (sym == r + st.l) {
                    if (w.log_slot != st.l) throw impossible_branch("CombA outside a package");
                    out.form.add_coeff(FormKey{st.i}, c, fa);
                }
                break;
            case StepKind::CombB:
                // dx_i/x_i -> dx_i'/x_i' + dy_l'/y_l'
                out.form.add_coeff(key, c, fa);
                if (sym == st.i) {
                    if (w.log_slot != st.l) throw impossible_branch("CombB outside a package");
                    out.form.add_coeff(FormKey{r + st.l}, c, fa);
                }
                break;
            case StepKind::Translate:
                if (sym == r + st.l) {
                    if (w.log_slot != st.l) throw impossible_branch("translation outside a package");
                    // dy_l/y_l -> dx_i/x_i + dy_l'/(y_l'+lambda)
                    out.form.add_coeff(FormKey{st.i}, c, fa);
                    TruncatedSeries unit = TruncatedSeries::monomial(
                        fa, std::vector<int32_t>(fa.r, 0),
                        [&] { std::vector<int32_t> J(fa.ny, 0); J[st.l] = 1; return J; }(), 1);
                    unit = add(unit, TruncatedSeries::constant(fa, st.lambda), fa);
                    TruncatedSeries inv = invert_unit(unit, fa, yb_default);
                    out.form.add_coeff(FormKey{r + st.l}, mul(c, inv, fa), fa);
                } else {
                    out.form.add_coeff(key, c, fa);
                }
                break;
            case StepKind::CoordChange:
                if (sym == r + st.l) {
                    // dy_l = dy_l' - d(shift)
                    out.form.add_coeff(key, c, fa);
                    for (int i = 0; i < r; ++i) {
                        TruncatedSeries g = x_log_derivative(st.shift, i);
                        if (!g.is_zero()) out.form.add_coeff(FormKey{i}, neg(mul(c, g, fa)), fa);
                    }
                    for (int j = 0; j < fa.ny; ++j) {
                        TruncatedSeries g = y_derivative(st.shift, j);
                        if (!g.is_zero()) out.form.add_coeff(FormKey{r + j}, neg(mul(c, g, fa)), fa);
                    }
                } else {
                    out.form.add_coeff(key, c, fa);
                }
                break;
        }
    }
    if (st.kind == StepKind::Translate && out.log_slot == st.l) out.log_slot = -1;
    return out;
}

// Pullback through one full record.
inline TruncatedSeries transform_series(const TruncatedSeries& f, const TransformRecord& rec,
                                        const Value& goal, int32_t yb_default) {
    TruncatedSeries cur = f;
    for (const auto& st : rec.steps) cur = transform_series_step(cur, st, goal, yb_default);
    return cur;
}

inline LogForm transform_form(const LogForm& w, const TransformRecord& rec, const Value& goal,
                              int32_t yb_default) {
    if (w.degree() == 0) {
        LogForm out(0);
        TruncatedSeries c = w.coeff(FormKey{});
        return LogForm::from_series(transform_series(c, rec, goal, yb_default));
    }
    if (w.degree() != 1)
        throw precondition_violated("only functions and 1-forms transform through models");

    ExtendedForm ext;
    ext.form = w;
    if (rec.kind == RecordKind::PuiseuxPackage) {
        // enter the extended representation: g dy_l = (g y_l) dy_l/y_l
        ext.log_slot = rec.l;
        const Frame& f0 = rec.steps.front().before;
        TruncatedSeries g = ext.form.coeff(FormKey{f0.r + rec.l});
        if (!g.is_zero()) {
            std::vector<int32_t> J(f0.ny, 0);
            J[rec.l] = 1;
            ext.form.set_coeff(FormKey{f0.r + rec.l},
                               shift_exponents(g, std::vector<int32_t>(f0.r, 0), J, f0));
        }
    }
    for (const auto& st : rec.steps) ext = transform_form_step(ext, st, goal, yb_default);
    if (ext.log_slot != -1) throw impossible_branch("package left the extended representation open");
    return ext.form;
}

// Pullback across the records appended after `from` to reach `to`.
template <typename Obj>
Obj transform_through(const Obj& obj, const ParamModel& from, const ParamModel& to) {
    Obj cur = obj;
    for (size_t k = from.history.size(); k < to.history.size(); ++k) {
        if constexpr (std::is_same_v<Obj, TruncatedSeries>)
            cur = transform_series(cur, to.history[k], to.precision_goal, to.y_bound_default);
        else
            cur = transform_form(cur, to.history[k], to.precision_goal, to.y_bound_default);
    }
    return cur;
}

// -------------------------------------------------- elementary transformations

// y_l' = y_l + f with f in k[[x, y_1..y_{l-1}]] (plus x-only parts), and
// nu_A(f) >= nu(y_l).
inline ParamModel coordinate_change(const ParamModel& m, int l, const TruncatedSeries& f) {
    const Frame& fr = m.frame;
    for (const auto& [e, c] : f.terms())
        for (int j = l; j < fr.ny; ++j)
            if (e.yj[j] != 0)
                throw precondition_violated("coordinate change shift uses a variable at or above y_l");
    Value vy = nu_of_dependent(m, l);
    if (!f.is_zero()) {
        Value va = explicit_value(f, fr);
        if (fr.lt(va, vy)) throw value_too_small("coordinate change needs nu_A(f) >= nu(y_l)");
    }

    ParamModel out = m;
    // psi_l' = psi_l + f(center)
    HahnSeries shift;
    {
        const auto& basis = m.basis();
        HahnSeries acc;
        for (const auto& [e, c] : f.terms()) {
            HahnSeries prod = HahnSeries::monomial(Value::zero(basis.rank()), c);
            for (int i = 0; i < fr.r; ++i)
                if (e.xi[i] != 0) prod = hahn_mul(prod, hahn_pow(m.center.x_assign[i], e.xi[i], basis), basis);
            for (int j = 0; j < l; ++j)
                if (e.yj[j] != 0) {
                    if (m.center.y_assign[j].empty() && !m.center.y_assign[j].known_zero())
                        throw insufficient_precision("coordinate change needs the center of a lower variable");
                    prod = hahn_mul(prod, hahn_pow(m.center.y_assign[j], e.yj[j], basis), basis);
                }
            acc = hahn_add(acc, prod, basis);
        }
        shift = std::move(acc);
    }
    out.center.y_assign[l] = hahn_add(m.center.y_assign[l], shift, m.basis());
    refresh_y_values(out);

    TransformRecord rec;
    rec.kind = RecordKind::CoordinateChange;
    rec.l = l;
    rec.shift = f;
    ElemStep st;
    st.kind = StepKind::CoordChange;
    st.l = l;
    st.shift = f;
    st.before = m.frame;
    st.after = out.frame;
    rec.steps.push_back(std::move(st));
    out.history.push_back(std::move(rec));
    return out;
}

// x_j' = x_j / x_i after normalizing so nu(x_i) < nu(x_j).
inline ParamModel independent_blowup(const ParamModel& m, int i, int j) {
    const Frame& fr = m.frame;
    if (i == j) throw precondition_violated("blow-up needs two distinct independent parameters");
    auto ord = fr.cmp(fr.x_values[i], fr.x_values[j]);
    if (ord == std::strong_ordering::equal)
        throw equal_values("independent parameters with equal values cannot be blown up");
    if (ord > 0) std::swap(i, j);

    ParamModel out = m;
    out.frame.x_values[j] = fr.x_values[j] - fr.x_values[i];
    out.center.x_assign[j] = hahn_mul(
        m.center.x_assign[j], hahn_invert(m.center.x_assign[i], m.basis(), &m.hahn_window),
        m.basis());
    refresh_y_values(out);

    TransformRecord rec;
    rec.kind = RecordKind::IndependentBlowup;
    rec.i = i;
    rec.j = j;
    ElemStep st;
    st.kind = StepKind::Blowup;
    st.i = i;
    st.j = j;
    st.before = m.frame;
    st.after = out.frame;
    rec.steps.push_back(std::move(st));
    out.history.push_back(std::move(rec));
    return out;
}

struct PuiseuxData {
    ParamModel model;
    MatZ B, C;
    long d = 1;
    std::vector<mpz_class> p;
    mpq_class lambda;
};

// The l-Puiseux package: combinatorial descent (transversal first, smallest
// value first) ending in the blow-up with translation, with the B and C
// matrices accumulated and cross-checked.
inline PuiseuxData puiseux_package(const ParamModel& m, int l) {
    const auto& basis = m.basis();
    const int r = m.frame.r;
    {
        const HahnSeries& psi = m.center.y_assign[l];
        if (psi.known_zero())
            throw degenerate_center("the center assigns zero to " + m.frame.y_names[l]);
        if (psi.empty())
            throw insufficient_precision("center for " + m.frame.y_names[l] + " is exhausted");
    }

    // contact data: d, p coprime with d*nu(y_l) = p . nu(x)
    Value vy0 = nu_of_dependent(m, l);
    MatQ M(r, std::vector<mpq_class>(r));
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < r; ++k) M[i][k] = m.frame.x_values[i].coeffs()[k];
    std::vector<mpq_class> q = solve_row_system(M, vy0.coeffs());
    mpz_class den = 1;
    for (const auto& qi : q) den = lcm(den, qi.get_den());
    std::vector<mpz_class> p(r);
    for (int i = 0; i < r; ++i) p[i] = mpz_class(q[i] * den);
    mpz_class g = den;
    for (const auto& pi : p) g = gcd(g, pi);
    den /= g;
    for (auto& pi : p) pi /= g;
    if (den > std::numeric_limits<long>::max())
        throw iteration_limit("ramification index overflow");
    long d = static_cast<long>(den.get_si());

    PuiseuxData out;
    out.d = d;
    out.p = p;
    out.B = identity_z(r + 1);

    ParamModel cur = m;
    TransformRecord rec;
    rec.kind = RecordKind::PuiseuxPackage;
    rec.l = l;

    auto divide_center = [&](const HahnSeries& num, const HahnSeries& den, const Value& lead) {
        if (den.terms().size() == 1 && den.leading_coeff() == 1)
            return hahn_shift(num, lead.scaled(-1));
        return hahn_mul(num, hahn_invert(den, basis, &cur.hahn_window), basis);
    };

    auto apply_comb_a = [&](int i) {
        ParamModel next = cur;
        next.center.y_assign[l] = divide_center(cur.center.y_assign[l], cur.center.x_assign[i],
                                                cur.frame.x_values[i]);
        refresh_y_values(next);
        ElemStep st;
        st.kind = StepKind::CombA;
        st.l = l;
        st.i = i;
        st.before = cur.frame;
        st.after = next.frame;
        rec.steps.push_back(st);
        MatZ E = identity_z(r + 1);
        E[r][i] = 1;  // y = x_i * y'
        out.B = mul_z(out.B, E);
        cur = std::move(next);
    };

    auto apply_comb_b = [&](int i) {
        Value vy = nu_of_dependent(cur, l);
        ParamModel next = cur;
        next.center.x_assign[i] = divide_center(cur.center.x_assign[i], cur.center.y_assign[l], vy);
        next.frame.x_values[i] = cur.frame.x_values[i] - vy;
        refresh_y_values(next);
        ElemStep st;
        st.kind = StepKind::CombB;
        st.l = l;
        st.i = i;
        st.before = cur.frame;
        st.after = next.frame;
        rec.steps.push_back(st);
        MatZ E = identity_z(r + 1);
        E[i][r] = 1;  // x_i = x_i' * y'
        out.B = mul_z(out.B, E);
        cur = std::move(next);
    };

    auto apply_blowup = [&](int i, int j) {
        // x_j' = x_j / x_i with nu(x_i) < nu(x_j), inside the package
        ParamModel next = cur;
        next.frame.x_values[j] = cur.frame.x_values[j] - cur.frame.x_values[i];
        next.center.x_assign[j] = divide_center(cur.center.x_assign[j], cur.center.x_assign[i],
                                                cur.frame.x_values[i]);
        refresh_y_values(next);
        ElemStep st;
        st.kind = StepKind::Blowup;
        st.i = i;
        st.j = j;
        st.before = cur.frame;
        st.after = next.frame;
        rec.steps.push_back(st);
        MatZ E = identity_z(r + 1);
        E[j][i] = 1;  // x_j = x_i' * x_j'
        out.B = mul_z(out.B, E);
        cur = std::move(next);
    };

    // Descent guided by the exact integer relation d*nu(y_l) = q . nu(x),
    // recomputed each round.  Sign-mixed q is fixed by independent blow-ups
    // (each strictly lowers the l1 norm of q); with q >= 0 the transversal
    // steps spend Sum(q) when d = 1, and the ramified steps strictly lower
    // d otherwise.  Pure min-pick on the pair {x_i, y_l} alone need not
    // terminate for r >= 2, which is why the blow-ups are interleaved.
    auto relation = [&]() {
        Value vy = nu_of_dependent(cur, l);
        if (vy.is_infinity())
            throw degenerate_center("center for " + cur.frame.y_names[l] + " vanished mid-package");
        MatQ Mc(r, std::vector<mpq_class>(r));
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < r; ++k) Mc[i][k] = cur.frame.x_values[i].coeffs()[k];
        std::vector<mpq_class> qq = solve_row_system(Mc, vy.coeffs());
        mpz_class dd = 1;
        for (const auto& qi : qq) dd = lcm(dd, qi.get_den());
        std::vector<mpz_class> pp(r);
        for (int i = 0; i < r; ++i) pp[i] = mpz_class(qq[i] * dd);
        mpz_class gg = dd;
        for (const auto& pi : pp) gg = gcd(gg, pi);
        dd /= gg;
        for (auto& pi : pp) pi /= gg;
        return std::pair<std::vector<mpz_class>, mpz_class>(std::move(pp), std::move(dd));
    };

    const int cap = 100000;
    int rounds = 0;
    while (true) {
        if (++rounds > cap) throw iteration_limit("puiseux descent failed to terminate");
        Value vy = nu_of_dependent(cur, l);

        int translate_i = -1;
        for (int i = 0; i < r; ++i)
            if (cur.frame.eq(cur.frame.x_values[i], vy)) { translate_i = i; break; }
        if (translate_i >= 0) {
            int i = translate_i;
            HahnSeries phi = divide_center(cur.center.y_assign[l], cur.center.x_assign[i],
                                           cur.frame.x_values[i]);
            if (phi.empty() || !phi.leading_exponent().is_zero())
                throw impossible_branch("contact function must have order zero");
            mpq_class lambda = phi.leading_coeff();
            HahnSeries newpsi(phi.validity());
            for (const auto& [e, c] : phi.terms())
                if (!e.is_zero()) newpsi.mut_terms().push_back({e, c});

            ParamModel next = cur;
            next.center.y_assign[l] = std::move(newpsi);
            refresh_y_values(next);

            ElemStep st;
            st.kind = StepKind::Translate;
            st.l = l;
            st.i = i;
            st.lambda = lambda;
            st.before = cur.frame;
            st.after = next.frame;
            rec.steps.push_back(st);
            out.lambda = lambda;
            rec.i = i;
            cur = std::move(next);
            break;
        }

        auto [q, dq] = relation();

        int neg = -1, pos = -1;
        for (int i = 0; i < r; ++i) {
            if (neg < 0 && sgn(q[i]) < 0) neg = i;
            if (pos < 0 && sgn(q[i]) > 0) pos = i;
        }
        if (pos < 0) throw impossible_branch("contact relation lost positivity");

        if (neg >= 0) {
            // mixed signs: one blow-up on the pair strictly shrinks |q|_1
            if (cur.frame.lt(cur.frame.x_values[neg], cur.frame.x_values[pos]))
                apply_blowup(neg, pos);
            else
                apply_blowup(pos, neg);
            continue;
        }

        if (dq == 1) {
            // transversal budget: the cheapest positive-coefficient variable
            // always sits strictly under nu(y_l)
            int pick = -1;
            for (int i = 0; i < r; ++i) {
                if (sgn(q[i]) <= 0) continue;
                if (pick < 0 || cur.frame.lt(cur.frame.x_values[i], cur.frame.x_values[pick]))
                    pick = i;
            }
            if (!cur.frame.lt(cur.frame.x_values[pick], vy))
                throw impossible_branch("transversal descent lost its candidate");
            apply_comb_a(pick);
            continue;
        }

        // d >= 2: transversal step if available, else every ramified step
        int pick = -1;
        for (int i = 0; i < r; ++i) {
            if (sgn(q[i]) <= 0) continue;
            if (!cur.frame.lt(cur.frame.x_values[i], vy)) continue;
            if (pick < 0 || cur.frame.lt(cur.frame.x_values[i], cur.frame.x_values[pick])) pick = i;
        }
        if (pick >= 0) {
            apply_comb_a(pick);
        } else {
            for (int i = 0; i < r; ++i)
                if (sgn(q[i]) > 0) apply_comb_b(i);
        }
    }

    // C: fold the translation divisor column into the B bookkeeping
    const int i0 = rec.i;
    out.C = out.B;
    for (int s = 0; s <= r; ++s) out.C[s][i0] = out.B[s][i0] + out.B[s][r];

    if (det_z(out.B) != 1 || det_z(out.C) != 1)
        throw impossible_branch("package matrices must be unimodular");
    MatQ Cinv = invert_q(out.C);
    for (int k = 0; k < r; ++k)
        if (Cinv[r][k] != mpq_class(-p[k]))
            throw impossible_branch("package contact data disagrees with C^{-1}");
    if (Cinv[r][r] != mpq_class(den))
        throw impossible_branch("ramification index disagrees with C^{-1}");

    rec.B = out.B;
    rec.C = out.C;
    rec.d = d;
    rec.p = p;
    rec.lambda = out.lambda;
    cur.history.push_back(std::move(rec));
    out.model = std::move(cur);
    return out;
}

// ------------------------------------------------------- principalization

struct PrincipalizeResult {
    ParamModel model;
    std::vector<std::vector<int32_t>> transformed;
    size_t divisor_index = 0;
};

inline bool divides(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

// Iterated pair blow-ups until the minimal-value monomial divides the rest.
inline PrincipalizeResult principalize_monomials(const ParamModel& m,
                                                 std::vector<std::vector<int32_t>> mons) {
    if (mons.empty()) throw precondition_violated("principalization needs monomials");
    PrincipalizeResult res;
    res.model = m;
    res.transformed = std::move(mons);

    const int cap = 100000;
    int rounds = 0;
    while (true) {
        if (++rounds > cap) throw iteration_limit("principalization failed to terminate");
        const Frame& fr = res.model.frame;
        size_t i0 = 0;
        Value best = fr.monomial_value(res.transformed[0]);
        for (size_t k = 1; k < res.transformed.size(); ++k) {
            Value v = fr.monomial_value(res.transformed[k]);
            if (fr.lt(v, best)) { best = std::move(v); i0 = k; }
        }
        res.divisor_index = i0;

        const auto& I0 = res.transformed[i0];
        int a = -1, b = -1;
        for (size_t k = 0; k < res.transformed.size() && a < 0; ++k) {
            if (k == i0 || divides(I0, res.transformed[k])) continue;
            const auto& J = res.transformed[k];
            for (int t = 0; t < fr.r && a < 0; ++t)
                if (I0[t] > J[t])
                    for (int u = 0; u < fr.r; ++u)
                        if (I0[u] < J[u]) { a = t; b = u; break; }
        }
        if (a < 0) return res;

        res.model = independent_blowup(res.model, a, b);
        const ElemStep& st = res.model.history.back().steps.front();
        for (auto& I : res.transformed) {
            I[st.i] += I[st.j];
        }
    }
}

} // namespace loguni
