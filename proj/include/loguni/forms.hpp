#pragma once

// Logarithmic differential p-forms over the basis dx_i/x_i, dy_j with
// truncated series coefficients, p <= 3.  Antisymmetry is canonicalized:
// keys are strictly increasing index tuples, signs live in the coefficients.

#include <algorithm>
#include <map>
#include <vector>

#include "loguni/series.hpp"

namespace loguni {

// Basis symbol indices: 0..r-1 are dx_i/x_i, r..r+ny-1 are dy_j.
using FormKey = std::vector<int32_t>;

class LogForm {
public:
    using CoeffMap = std::map<FormKey, TruncatedSeries>;

    LogForm() = default;
    explicit LogForm(int degree) : deg_(degree) {}

    static LogForm from_series(const TruncatedSeries& f) {
        LogForm w(0);
        if (!f.is_zero()) w.coeffs_[FormKey{}] = f;
        return w;
    }

    int degree() const { return deg_; }
    const CoeffMap& coeffs() const { return coeffs_; }
    bool is_zero() const {
        for (const auto& [k, c] : coeffs_)
            if (!c.is_zero()) return false;
        return true;
    }

    TruncatedSeries coeff(const FormKey& k) const {
        auto it = coeffs_.find(k);
        return it == coeffs_.end() ? TruncatedSeries() : it->second;
    }

    void set_coeff(FormKey k, TruncatedSeries f) {
        if (static_cast<int>(k.size()) != deg_)
            throw precondition_violated("form key degree mismatch");
        if (!std::is_sorted(k.begin(), k.end()) ||
            std::adjacent_find(k.begin(), k.end()) != k.end())
            throw precondition_violated("form keys must be strictly increasing");
        if (f.is_zero())
            coeffs_.erase(k);
        else
            coeffs_[std::move(k)] = std::move(f);
    }

    void add_coeff(const FormKey& k, const TruncatedSeries& f, const Frame& fr) {
        auto it = coeffs_.find(k);
        if (it == coeffs_.end()) {
            set_coeff(k, f);
        } else {
            it->second = add(it->second, f, fr);
            if (it->second.is_zero()) coeffs_.erase(it);
        }
    }

    void prune() {
        for (auto it = coeffs_.begin(); it != coeffs_.end();)
            it = it->second.is_zero() ? coeffs_.erase(it) : std::next(it);
    }

private:
    int deg_ = 1;
    CoeffMap coeffs_;
};

inline LogForm add(const LogForm& a, const LogForm& b, const Frame& fr) {
    if (a.degree() != b.degree()) throw precondition_violated("adding forms of different degree");
    LogForm out = a;
    for (const auto& [k, c] : b.coeffs()) out.add_coeff(k, c, fr);
    return out;
}

inline LogForm scal(const LogForm& a, const mpq_class& c) {
    LogForm out(a.degree());
    if (sgn(c) == 0) return out;
    for (const auto& [k, f] : a.coeffs()) out.set_coeff(k, scal(f, c));
    return out;
}

inline LogForm sub(const LogForm& a, const LogForm& b, const Frame& fr) {
    return add(a, scal(b, -1), fr);
}

inline LogForm mul(const TruncatedSeries& f, const LogForm& a, const Frame& fr) {
    LogForm out(a.degree());
    for (const auto& [k, c] : a.coeffs()) out.set_coeff(k, mul(f, c, fr));
    return out;
}

namespace detail {

// Merges two strictly increasing tuples; returns {key, sign}, sign 0 on clash.
inline std::pair<FormKey, int> merge_keys(const FormKey& a, const FormKey& b) {
    FormKey out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    int sign = 1;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return {{}, 0};
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else {
            // b[j] hops over the remaining entries of a
            if ((a.size() - i) % 2 == 1) sign = -sign;
            out.push_back(b[j++]);
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return {std::move(out), sign};
}

} // namespace detail

inline LogForm wedge(const LogForm& a, const LogForm& b, const Frame& fr) {
    // degree above the ambient dimension collapses to zero on its own
    LogForm out(a.degree() + b.degree());
    for (const auto& [ka, ca] : a.coeffs()) {
        for (const auto& [kb, cb] : b.coeffs()) {
            auto [k, sign] = detail::merge_keys(ka, kb);
            if (sign == 0) continue;
            TruncatedSeries c = mul(ca, cb, fr);
            if (sign < 0) c = neg(c);
            out.add_coeff(k, c, fr);
        }
    }
    return out;
}

// dx^mu/x^mu as a 1-form with rational residues mu.
inline LogForm log_monomial_form(const std::vector<mpq_class>& mu, const Frame& fr) {
    LogForm out(1);
    for (int i = 0; i < fr.r; ++i)
        if (sgn(mu[i]) != 0)
            out.set_coeff(FormKey{i}, TruncatedSeries::constant(fr, mu[i]));
    return out;
}

// Exterior derivative in the log basis; the basis symbols are closed.
inline LogForm ext_d(const LogForm& a, const Frame& fr) {
    LogForm out(a.degree() + 1);
    for (const auto& [k, f] : a.coeffs()) {
        LogForm df(1);
        for (int i = 0; i < fr.r; ++i) {
            TruncatedSeries g = x_log_derivative(f, i);
            if (!g.is_zero()) df.set_coeff(FormKey{i}, std::move(g));
        }
        for (int j = 0; j < fr.ny; ++j) {
            TruncatedSeries g = y_derivative(f, j);
            if (!g.is_zero()) df.set_coeff(FormKey{fr.r + j}, std::move(g));
        }
        LogForm base(a.degree());
        base.set_coeff(k, TruncatedSeries::constant(fr, 1));
        out = add(out, wedge(df, base, fr), fr);
    }
    return out;
}

// d_mu xi = dx^mu/x^mu ^ xi + d xi.
inline LogForm ext_d_mu(const LogForm& a, const std::vector<mpq_class>& mu, const Frame& fr) {
    return add(wedge(log_monomial_form(mu, fr), a, fr), ext_d(a, fr), fr);
}

inline Value explicit_value_form(const LogForm& a, const Frame& fr) {
    Value best = Value::infinity();
    for (const auto& [k, f] : a.coeffs()) best = fr.vmin(best, explicit_value(f, fr));
    return best;
}

// Smallest x-value window over the coefficients (INFINITY when exact).
inline Value form_x_window(const LogForm& a, const Frame& fr) {
    Value w = Value::infinity();
    for (const auto& [k, f] : a.coeffs()) w = fr.vmin(w, f.x_value_bound());
    return w;
}

inline int32_t form_y_window(const LogForm& a) {
    int32_t w = kUnboundedDegree;
    for (const auto& [k, f] : a.coeffs()) w = min_deg(w, f.y_degree_bound());
    return w;
}

// d_alpha xi = alpha ^ xi + d xi for a closed 0-final dominant alpha.
inline LogForm ext_d_alpha(const LogForm& a, const LogForm& alpha, const Frame& fr);

// gamma-final test for 1-forms: only the log-x coefficients can certify
// dominance.
inline FinalityResult finality_form(const LogForm& a, const Value& gamma, const Frame& fr) {
    if (a.degree() != 1) throw precondition_violated("finality_form expects a 1-form");
    Value w = form_x_window(a, fr);
    if (!w.is_infinity() && fr.cmp(gamma, w) > 0)
        throw insufficient_precision("finality requested beyond the form's x-value window");
    Value delta = explicit_value_form(a, fr);
    if (fr.cmp(delta, gamma) > 0) return {Finality::Recessive, std::move(delta)};
    for (int i = 0; i < fr.r; ++i) {
        TruncatedSeries f = a.coeff(FormKey{i});
        if (f.is_zero()) continue;
        for (const auto& [e, c] : f.terms())
            if (e.pure_x() && fr.eq(fr.monomial_value(e.xi), delta))
                return {Finality::Dominant, std::move(delta)};
    }
    return {Finality::NotFinal, std::move(delta)};
}

struct IntegrabilityCheck {
    bool ok;
    Value witness;  // explicit value of omega ^ d omega
};

// gamma-truncated integrability: nu_A(omega ^ d omega) >= 2 gamma.
inline IntegrabilityCheck integrability_defect(const LogForm& omega, const Value& gamma,
                                               const Frame& fr) {
    LogForm wdw = wedge(omega, ext_d(omega, fr), fr);
    Value two_gamma = gamma + gamma;
    Value v = explicit_value_form(wdw, fr);
    if (fr.cmp(v, two_gamma) >= 0) {
        Value w = form_x_window(wdw, fr);
        if (!w.is_infinity() && fr.cmp(two_gamma, w) > 0 && v.is_infinity())
            throw insufficient_precision("integrability check beyond the represented window");
        return {true, std::move(v)};
    }
    return {false, std::move(v)};
}

inline LogForm ext_d_alpha(const LogForm& a, const LogForm& alpha, const Frame& fr) {
    if (alpha.degree() != 1) throw precondition_violated("alpha must be a 1-form");
    if (!ext_d(alpha, fr).is_zero())
        throw precondition_violated("alpha must be closed on the represented window");
    Value zero = fr.zero_value();
    if (finality_form(alpha, zero, fr).kind != Finality::Dominant)
        throw precondition_violated("alpha must be 0-final dominant");
    return add(wedge(alpha, a, fr), ext_d(a, fr), fr);
}

} // namespace loguni
