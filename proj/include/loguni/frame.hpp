#pragma once

// The ambient parameter frame for series and form arithmetic: rank data,
// the root value basis, and the current values of the independent and
// dependent parameters.  Models own a Frame and rebuild it after every
// elementary transformation.

#include <compare>
#include <memory>
#include <string>
#include <vector>

#include "loguni/algebraic.hpp"

namespace loguni {

struct Frame {
    std::shared_ptr<const BasisSpec> basis;
    int r = 0;   // independent parameters x_1..x_r
    int ny = 0;  // dependent parameters y_1..y_ny
    std::vector<Value> x_values;  // nu(x_i) as coordinates over the root basis
    std::vector<Value> y_values;  // nu(y_j); INFINITY when the center says nothing
    std::vector<std::string> x_names, y_names;

    int nvars() const { return r + ny; }

    Value monomial_value(const std::vector<int32_t>& I) const {
        Value acc = Value::zero(basis->rank());
        for (size_t i = 0; i < I.size(); ++i) {
            if (I[i] == 0) continue;
            acc = acc + x_values[i].scaled(mpq_class(I[i]));
        }
        return acc;
    }

    std::strong_ordering cmp(const Value& a, const Value& b) const {
        return compare(a, b, *basis);
    }
    bool lt(const Value& a, const Value& b) const { return cmp(a, b) < 0; }
    bool le(const Value& a, const Value& b) const { return cmp(a, b) <= 0; }
    bool eq(const Value& a, const Value& b) const { return cmp(a, b) == 0; }

    Value vmin(const Value& a, const Value& b) const { return le(a, b) ? a : b; }
    Value vmax(const Value& a, const Value& b) const { return le(a, b) ? b : a; }

    Value zero_value() const { return Value::zero(basis->rank()); }

    // Largest finite nu(y_j); zero value when there are no finite ones.
    Value max_y_value() const {
        Value m = zero_value();
        for (const auto& v : y_values)
            if (!v.is_infinity()) m = vmax(m, v);
        return m;
    }
};

inline Frame make_frame(std::shared_ptr<const BasisSpec> basis, int ny,
                        std::vector<std::string> x_names = {},
                        std::vector<std::string> y_names = {}) {
    Frame f;
    f.basis = std::move(basis);
    f.r = f.basis->rank();
    f.ny = ny;
    f.x_values.reserve(f.r);
    for (int i = 0; i < f.r; ++i) {
        std::vector<mpq_class> c(f.r);
        c[i] = 1;
        f.x_values.emplace_back(std::move(c));
    }
    f.y_values.assign(ny, Value::infinity());
    if (x_names.empty())
        for (int i = 0; i < f.r; ++i) x_names.push_back("x" + std::to_string(i + 1));
    if (y_names.empty())
        for (int j = 0; j < ny; ++j) y_names.push_back("y" + std::to_string(j + 1));
    f.x_names = std::move(x_names);
    f.y_names = std::move(y_names);
    return f;
}

} // namespace loguni
