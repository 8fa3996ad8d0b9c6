#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "loguni/series.hpp"
#include "test_helpers.hpp"

using namespace loguni;
using lt::S;

namespace {
Frame frame_r1(int ny = 2) { return make_frame(lt::rational_basis({1}), ny); }
Frame frame_r2_sqrt2(int ny = 1) { return make_frame(lt::one_sqrt2_basis(), ny); }
}  // namespace

TEST_CASE("explicit value basics") {
    Frame fr = frame_r1();
    CHECK(explicit_value(S(fr, "0"), fr).is_infinity());
    CHECK(explicit_value(S(fr, "y1 + y2^2"), fr).is_zero());

    Frame f2 = frame_r2_sqrt2();
    // f = x1^2 y1 + x2, basis (1, sqrt2): min(2, sqrt2) = sqrt2 = (0,1)
    Value v = explicit_value(S(f2, "x1^2 y1 + x2"), f2);
    CHECK(v == lt::qval(f2, {0, 1}));
}

TEST_CASE("initial form filters support at the given value") {
    Frame fr = frame_r1();
    auto f = S(fr, "x1^2 + x1^2 y1 + x1^3");
    auto in2 = initial_form(f, lt::qv1(fr, 2), fr);
    CHECK(in2.nonzero());
    CHECK(in2.terms.terms().size() == 2);
    CHECK(in2.terms.coeff(Expo{{2}, {0, 0}}) == 1);
    CHECK(in2.terms.coeff(Expo{{2}, {1, 0}}) == 1);

    // nonzero iff delta = explicit value
    CHECK_FALSE(initial_form(S(fr, "x1^3"), lt::qv1(fr, 2), fr).nonzero());
    CHECK_THROWS_AS(initial_form(S(fr, "x1"), lt::qv1(fr, 2), fr), precondition_violated);
}

TEST_CASE("finality verdicts") {
    Frame fr = frame_r1();
    auto dom = finality(S(fr, "x1 + x1 y1"), lt::qv1(fr, 1), fr);
    CHECK(dom.kind == Finality::Dominant);
    CHECK(dom.delta == lt::qv1(fr, 1));

    CHECK(finality(S(fr, "x1 y1"), lt::qv1(fr, 1), fr).kind == Finality::NotFinal);
    CHECK(finality(S(fr, "x1^3"), lt::qv1(fr, 2), fr).kind == Finality::Recessive);
}

TEST_CASE("finality beyond the window is refused") {
    Frame fr = frame_r1();
    auto f = S(fr, "x1 y1");
    f.set_bounds(lt::qv1(fr, 2), kUnboundedDegree);
    CHECK_THROWS_AS(finality(f, lt::qv1(fr, 3), fr), insufficient_precision);
    CHECK(finality(f, lt::qv1(fr, 2), fr).kind == Finality::NotFinal);
}

TEST_CASE("dominance is monotone in gamma") {
    Frame fr = frame_r1();
    auto f = S(fr, "x1 + x1 y1");
    auto a = finality(f, lt::qv1(fr, 1), fr);
    auto b = finality(f, lt::qv1(fr, 5), fr);
    CHECK(a.kind == Finality::Dominant);
    CHECK(b.kind == Finality::Dominant);
    CHECK(a.delta == b.delta);
}

TEST_CASE("ring ops") {
    Frame fr = frame_r1();
    CHECK(mul(S(fr, "1 + x1"), S(fr, "1 - x1"), fr).terms() == S(fr, "1 - x1^2").terms());
    auto f = S(fr, "x1 + y1");
    CHECK(add(f, TruncatedSeries::zero(fr), fr).terms() == f.terms());

    auto inv = invert_unit(S(fr, "1 + y1"), fr, 3);
    CHECK(inv.terms() == S(fr, "1 - y1 + y1^2 - y1^3").terms());
    CHECK(inv.y_degree_bound() == 3);

    CHECK_THROWS_AS(invert_unit(S(fr, "y1"), fr), not_a_unit);
}

TEST_CASE("invert_unit with x tail uses the provided window") {
    Frame fr = frame_r1();
    Value w = lt::qv1(fr, 3);
    auto inv = invert_unit(S(fr, "1 + x1"), fr, 8, &w);
    CHECK(inv.terms() == S(fr, "1 - x1 + x1^2 - x1^3").terms());
    CHECK_THROWS_AS(invert_unit(S(fr, "1 + x1"), fr), insufficient_precision);
}

TEST_CASE("multiplicativity and min law of explicit values") {
    Frame fr = frame_r2_sqrt2(2);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> d(0, 3), c(-4, 4);
    auto rnd = [&] {
        TruncatedSeries f;
        for (int t = 0; t < 4; ++t) {
            int q = c(rng);
            if (q == 0) continue;
            f.set_term(Expo{{d(rng), d(rng)}, {d(rng), d(rng)}}, f.coeff(Expo{{0,0},{0,0}}) * 0 + q);
        }
        return f;
    };
    for (int k = 0; k < 100; ++k) {
        auto f = rnd(), g = rnd();
        Value vf = explicit_value(f, fr), vg = explicit_value(g, fr);
        Value vfg = explicit_value(mul(f, g, fr), fr);
        CHECK(vfg == vf + vg);  // exact by Q-independence: no cancellation at the bottom

        Value vsum = explicit_value(add(f, g, fr), fr);
        CHECK(fr.cmp(vsum, fr.vmin(vf, vg)) >= 0);
        if (!f.is_zero() && !g.is_zero() && fr.cmp(vf, vg) != 0)
            CHECK(vsum == fr.vmin(vf, vg));
    }
}

TEST_CASE("normalize drops out-of-window terms") {
    Frame fr = frame_r1();
    auto f = S(fr, "x1 + x1^5 + y1^4");
    f.set_bounds(lt::qv1(fr, 3), 2);
    f.normalize(fr);
    CHECK(f.terms().size() == 1);
    CHECK(f.coeff(Expo{{1}, {0, 0}}) == 1);
}

TEST_CASE("derivatives") {
    Frame fr = frame_r1();
    auto f = S(fr, "x1^2 y1 + y2");
    CHECK(x_log_derivative(f, 0).terms() == S(fr, "2 x1^2 y1").terms());
    CHECK(y_derivative(f, 0).terms() == S(fr, "x1^2").terms());
    CHECK(y_derivative(f, 1).terms() == S(fr, "1").terms());
    // antiderivative undoes the derivative on y-pure series
    auto g = S(fr, "y1^2 + 3 y1 y2");
    CHECK(y_derivative(y_antiderivative(g, 0), 0).terms() == g.terms());
}

TEST_CASE("substitution: y1 -> y1 - x1^2 on exact data") {
    Frame fr = frame_r1();
    // f = y1^2: (y1 - x1^2)^2 = y1^2 - 2 x1^2 y1 + x1^4
    auto s = S(fr, "y1 - x1^2");
    auto out = subst_y(S(fr, "y1^2"), 0, s, fr, fr.zero_value());
    CHECK(out.terms() == S(fr, "y1^2 - 2 x1^2 y1 + x1^4").terms());
    CHECK(out.y_degree_bound() == kUnboundedDegree);
}

TEST_CASE("substitution prices unknown tails") {
    Frame fr = frame_r1();
    fr.y_values[0] = lt::qv1(fr, 2);  // nu(y1) = 2
    fr.y_values[1] = lt::qv1(fr, 2);
    auto f = S(fr, "y1^3");
    f.set_bounds(Value::infinity(), 3);  // levels above 3 unknown
    auto s = S(fr, "y1 + x1^2");
    auto out = subst_y(f, 0, s, fr, lt::qv1(fr, 4));
    // the requested x-window survives and the in-window image is exact
    CHECK(fr.cmp(out.x_value_bound(), lt::qv1(fr, 4)) >= 0);
    CHECK(out.coeff(Expo{{4}, {1, 0}}) == 3);  // 3 y1 x1^4
}

TEST_CASE("exp series") {
    Frame fr = frame_r1();
    auto e = exp_series(S(fr, "y1"), fr, 4);
    CHECK(e.coeff(Expo{{0}, {0, 0}}) == 1);
    CHECK(e.coeff(Expo{{0}, {1, 0}}) == 1);
    CHECK(e.coeff(Expo{{0}, {2, 0}}) == mpq_class(1, 2));
    CHECK(e.coeff(Expo{{0}, {3, 0}}) == mpq_class(1, 6));
    CHECK_THROWS_AS(exp_series(S(fr, "1 + y1"), fr), precondition_violated);
}
