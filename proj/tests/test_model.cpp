#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "loguni/model.hpp"
#include "test_helpers.hpp"

using namespace loguni;
using lt::F1;
using lt::S;

namespace {

// r=1 basis (1), center y1 = t^2 + t^3 (the classical LU example)
ParamModel model_example_a() {
    auto b = lt::rational_basis({1});
    HahnSeries psi;
    psi.add_term(*b, Value(std::vector<mpq_class>{2}), 1);
    psi.add_term(*b, Value(std::vector<mpq_class>{3}), 1);
    return make_model(b, 1, {psi});
}

ParamModel model_two_y(std::vector<std::pair<mpq_class, mpq_class>> exps) {
    auto b = lt::rational_basis({1});
    std::vector<HahnSeries> ys;
    for (auto& [e1, e2] : exps) {
        HahnSeries psi;
        psi.add_term(*b, Value(std::vector<mpq_class>{e1}), 1);
        if (e2 != 0) psi.add_term(*b, Value(std::vector<mpq_class>{e2}), 1);
        ys.push_back(psi);
    }
    return make_model(b, static_cast<int>(ys.size()), ys);
}

}  // namespace

TEST_CASE("nu via center evaluation") {
    ParamModel m = model_example_a();
    const Frame& fr = m.frame;
    CHECK(nu(S(fr, "x1^2"), m) == lt::qv1(fr, 2));
    CHECK(nu(S(fr, "y1 - x1^2"), m) == lt::qv1(fr, 3));
    CHECK(nu(TruncatedSeries::zero(fr), m).is_infinity());
    // nu >= explicit value
    CHECK(fr.cmp(nu(S(fr, "y1 - x1^2"), m), explicit_value(S(fr, "y1 - x1^2"), fr)) >= 0);
}

TEST_CASE("coordinate change updates the center") {
    ParamModel m = model_example_a();
    const Frame& fr = m.frame;

    ParamModel id = coordinate_change(m, 0, TruncatedSeries::zero(fr));
    CHECK(id.history.size() == 1);
    CHECK(nu_of_dependent(id, 0) == lt::qv1(fr, 2));

    // y1' = y1 + x1^2: psi' = t^2+t^3+t^2 = 2t^2+t^3
    ParamModel plus = coordinate_change(m, 0, S(fr, "x1^2"));
    CHECK(nu_of_dependent(plus, 0) == lt::qv1(fr, 2));
    CHECK(plus.center.y_assign[0].leading_coeff() == 2);

    // y1' = y1 - x1^2: cancellation raises the value
    ParamModel minus = coordinate_change(m, 0, S(fr, "-1 x1^2"));
    CHECK(nu_of_dependent(minus, 0) == lt::qv1(fr, 3));

    CHECK_THROWS_AS(coordinate_change(m, 0, S(fr, "x1")), value_too_small);
    CHECK_THROWS_AS(coordinate_change(m, 0, S(fr, "y1")), precondition_violated);
}

TEST_CASE("independent blow-up") {
    auto b = lt::one_sqrt2_basis();
    HahnSeries psi;
    psi.add_term(*b, Value(std::vector<mpq_class>{1, 1}), 1);
    ParamModel m = make_model(b, 1, {psi});
    const Frame& fr = m.frame;

    ParamModel m2 = independent_blowup(m, 0, 1);  // nu(x1)=1 < nu(x2)=sqrt2
    CHECK(m2.frame.x_values[1] == lt::qval(fr, {-1, 1}));  // sqrt2 - 1
    CHECK(m2.frame.cmp(m2.frame.x_values[1], m2.frame.zero_value()) > 0);

    // x1 x2 pulls back to x1^2 x2'
    auto pulled = transform_through(S(fr, "x1 x2"), m, m2);
    CHECK(pulled.coeff(Expo{{2, 1}, {0}}) == 1);

    // values of monomials are preserved
    CHECK(m2.frame.monomial_value({2, 1}) == fr.monomial_value({1, 1}));

    CHECK_THROWS_AS(independent_blowup(m, 0, 0), precondition_violated);
}

TEST_CASE("puiseux package: d=1 worked example") {
    // r=1, basis (1), center y1 = t + t^2
    ParamModel m = model_two_y({{1, 2}});
    const Frame& fr = m.frame;

    PuiseuxData pd = puiseux_package(m, 0);
    CHECK(pd.d == 1);
    CHECK(pd.p.size() == 1);
    CHECK(pd.p[0] == 1);
    CHECK(pd.lambda == 1);
    CHECK(pd.B == identity_z(2));  // translation happens immediately
    CHECK(pd.C == MatZ{{1, 0}, {1, 1}});
    // new center: (t + t^2)/t - 1 = t
    CHECK(nu_of_dependent(pd.model, 0) == lt::qv1(fr, 1));
    CHECK(pd.model.center.y_assign[0].terms().size() == 1);

    // d=1 block shape: C = [[C0, 0], [pC0, 1]]
    CHECK(pd.C[0][1] == 0);
    CHECK(pd.C[1][1] == 1);
}

TEST_CASE("puiseux package: ramified d=5 case") {
    // nu(y1) = 3/5 over basis (1): d=5, p=(3)
    auto b = lt::rational_basis({1});
    HahnSeries psi;
    psi.add_term(*b, Value(std::vector<mpq_class>{mpq_class(3, 5)}), 1);
    psi.add_term(*b, Value(std::vector<mpq_class>{1}), 1);
    psi.set_validity(Value(std::vector<mpq_class>{10}));
    ParamModel m = make_model(b, 1, {psi});

    PuiseuxData pd = puiseux_package(m, 0);
    CHECK(pd.d == 5);
    CHECK(pd.p[0] == 3);
    CHECK(det_z(pd.B) == 1);
    CHECK(det_z(pd.C) == 1);
    for (const auto& row : pd.C)
        for (const auto& e : row) CHECK(e >= 0);
}

TEST_CASE("monomial transform law through a package") {
    ParamModel m = model_two_y({{1, 2}});
    const Frame& fr = m.frame;
    PuiseuxData pd = puiseux_package(m, 0);
    const Frame& f2 = pd.model.frame;

    // y1 = x1'(y1' + 1): U' = (y1'+lambda)^1
    auto img = transform_through(S(fr, "y1"), m, pd.model);
    CHECK(img.coeff(Expo{{1}, {1}}) == 1);
    CHECK(img.coeff(Expo{{1}, {0}}) == 1);

    // dx1/x1 -> dx1'/x1'
    LogForm w(1);
    w.set_coeff(FormKey{0}, S(fr, "1"));
    auto wi = transform_through(w, m, pd.model);
    CHECK(wi.coeff(FormKey{0}).terms() == S(f2, "1").terms());

    // y1 dy1/y1 = dy1 -> x1'(y1'+1) dx1'/x1' + x1' dy1'
    LogForm dy(1);
    dy.set_coeff(FormKey{1}, S(fr, "1"));
    auto di = transform_through(dy, m, pd.model);
    CHECK(di.coeff(FormKey{0}).terms() == S(f2, "x1 y1 + x1").terms());
    CHECK(di.coeff(FormKey{1}).terms() == S(f2, "x1").terms());
}

TEST_CASE("principalization") {
    ParamModel m = model_two_y({{1, 0}});
    SECTION("single monomial and nested pairs are identities") {
        auto r1 = principalize_monomials(m, {{2}});
        CHECK(r1.model.history.empty());
        auto r2 = principalize_monomials(m, {{2}, {3}});
        CHECK(r2.model.history.empty());
        CHECK(r2.divisor_index == 0);
    }
    SECTION("x1^2 vs x2^3 over basis (1, sqrt2)") {
        auto b = lt::one_sqrt2_basis();
        HahnSeries psi;
        psi.add_term(*b, Value(std::vector<mpq_class>{1, 1}), 1);
        ParamModel m2 = make_model(b, 1, {psi});
        auto res = principalize_monomials(m2, {{2, 0}, {0, 3}});
        CHECK(res.divisor_index == 0);  // value 2 < 3 sqrt2
        CHECK(divides(res.transformed[0], res.transformed[1]));
        CHECK_FALSE(res.model.history.empty());
    }
}

namespace {

TruncatedSeries random_series(const Frame& fr, std::mt19937_64& rng, bool avoid_units = false) {
    std::uniform_int_distribution<int> d(0, 2), c(-3, 3), n(2, 4);
    TruncatedSeries f;
    int terms = n(rng);
    for (int t = 0; t < terms; ++t) {
        Expo e;
        e.xi.resize(fr.r);
        e.yj.resize(fr.ny);
        for (auto& v : e.xi) v = d(rng);
        for (auto& v : e.yj) v = d(rng);
        if (avoid_units && e.xi == std::vector<int32_t>(fr.r, 0) && e.ydeg() == 0) continue;
        int q = c(rng);
        if (q != 0) f.set_term(e, q);
    }
    return f;
}

LogForm random_one_form(const Frame& fr, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> which(0, fr.r + fr.ny - 1);
    LogForm w(1);
    for (int t = 0; t < 2; ++t) w.add_coeff(FormKey{which(rng)}, random_series(fr, rng), fr);
    return w;
}

ParamModel random_model(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nyd(1, 2), e1(1, 3), e2(4, 6), pick(0, 2);
    bool sqrt2 = pick(rng) == 0;
    auto b = sqrt2 ? lt::one_sqrt2_basis() : lt::rational_basis({1});
    int ny = nyd(rng);
    std::vector<HahnSeries> ys;
    for (int j = 0; j < ny; ++j) {
        HahnSeries psi;
        std::vector<mpq_class> lead(b->rank(), 0);
        lead[0] = e1(rng);
        psi.add_term(*b, Value(lead), 1 + (j % 2));
        std::vector<mpq_class> tail(b->rank(), 0);
        tail[0] = e2(rng);
        if (b->rank() > 1) tail[1] = 1;
        psi.add_term(*b, Value(tail), 1);
        ys.push_back(psi);
    }
    return make_model(b, ny, ys);
}

ParamModel random_elementary(const ParamModel& m, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    const Frame& fr = m.frame;
    for (int attempt = 0; attempt < 8; ++attempt) {
        int k = kind(rng);
        if (k == 0 && fr.r >= 2) {
            return independent_blowup(m, 0, 1);
        }
        if (k == 1) {
            std::uniform_int_distribution<int> ld(0, fr.ny - 1);
            int l = ld(rng);
            Value vy = nu_of_dependent(m, l);
            if (vy.is_infinity()) continue;
            // shift by a safe x-power monomial in lower variables
            std::vector<int32_t> I(fr.r, 0);
            I[0] = 8;
            TruncatedSeries f = TruncatedSeries::monomial(fr, I, std::vector<int32_t>(fr.ny, 0), 1);
            if (fr.lt(explicit_value(f, fr), vy)) continue;
            return coordinate_change(m, l, f);
        }
        std::uniform_int_distribution<int> ld(0, fr.ny - 1);
        int l = ld(rng);
        if (m.center.y_assign[l].empty()) continue;
        return puiseux_package(m, l).model;
    }
    return puiseux_package(m, 0).model;
}

}  // namespace

TEST_CASE("stability of explicit values under random transformations") {
    std::mt19937_64 rng(2024);
    Value gamma;
    int checked = 0;
    for (int round = 0; round < 60; ++round) {
        ParamModel m = random_model(rng);
        const Frame& fr = m.frame;
        TruncatedSeries f = random_series(fr, rng);
        LogForm w = random_one_form(fr, rng);
        ParamModel m2 = random_elementary(m, rng);

        Value vf = explicit_value(f, fr);
        auto f2 = transform_through(f, m, m2);
        Value vf2 = explicit_value(f2, m2.frame);
        CHECK(m2.frame.cmp(vf2, vf) >= 0);

        Value vw = explicit_value_form(w, fr);
        auto w2 = transform_through(w, m, m2);
        Value vw2 = explicit_value_form(w2, m2.frame);
        CHECK(m2.frame.cmp(vw2, vw) >= 0);

        // dominance: equality and preserved corner class, exactly when dominant
        if (!vf.is_infinity()) {
            gamma = vf;
            bool dom_before = finality(f, gamma, fr).kind == Finality::Dominant;
            bool conj = m2.frame.eq(vf2, vf) &&
                        finality(f2, vf2, m2.frame).kind == Finality::Dominant;
            CHECK(conj == dom_before);
            ++checked;
        }
        if (!vw.is_infinity()) {
            bool dom_before = finality_form(w, vw, fr).kind == Finality::Dominant;
            bool conj = m2.frame.eq(vw2, vw) &&
                        finality_form(w2, vw2, m2.frame).kind == Finality::Dominant;
            CHECK(conj == dom_before);
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("strict value increase for non-dominant objects") {
    std::mt19937_64 rng(555);
    int done = 0;
    for (int round = 0; round < 40 && done < 25; ++round) {
        ParamModel m = random_model(rng);
        const Frame& fr = m.frame;
        TruncatedSeries f = random_series(fr, rng, /*avoid_units=*/true);
        if (f.is_zero()) continue;
        Value vf = explicit_value(f, fr);
        if (finality(f, vf, fr).kind == Finality::Dominant) continue;

        ParamModel cur = m;
        TruncatedSeries fc = f;
        for (int j = 0; j < fr.ny; ++j) {
            if (cur.center.y_assign[j].empty()) continue;
            ParamModel next = puiseux_package(cur, j).model;
            fc = transform_through(fc, cur, next);
            cur = std::move(next);
        }
        Value vf2 = explicit_value(fc, cur.frame);
        CHECK(cur.frame.cmp(vf2, vf) > 0);
        ++done;
    }
    CHECK(done >= 25);
}

TEST_CASE("nu is invariant under transformation") {
    std::mt19937_64 rng(31337);
    for (int round = 0; round < 30; ++round) {
        ParamModel m = random_model(rng);
        TruncatedSeries f = random_series(m.frame, rng);
        ParamModel m2 = random_elementary(m, rng);
        auto f2 = transform_through(f, m, m2);
        Value v1, v2;
        bool ok1 = true, ok2 = true;
        try { v1 = nu(f, m); } catch (const insufficient_precision&) { ok1 = false; }
        try { v2 = nu(f2, m2); } catch (const insufficient_precision&) { ok2 = false; }
        if (ok1 && ok2) CHECK(v1 == v2);
    }
}

TEST_CASE("puiseux matrix identities on random centers") {
    std::mt19937_64 rng(808);
    std::uniform_int_distribution<int> ed(1, 5), dd(1, 3);
    int count = 0;
    for (int round = 0; round < 40; ++round) {
        auto b = round % 2 == 0 ? lt::rational_basis({1}) : lt::one_sqrt2_basis();
        HahnSeries psi;
        std::vector<mpq_class> lead(b->rank(), 0);
        lead[0] = mpq_class(ed(rng), dd(rng));
        if (b->rank() > 1 && round % 4 == 1) lead[1] = mpq_class(1, 2);
        psi.add_term(*b, Value(lead), 1);
        std::vector<mpq_class> tail = lead;
        tail[0] += 2;
        psi.add_term(*b, Value(tail), mpq_class(ed(rng)));
        psi.set_validity(Value([&] {
            std::vector<mpq_class> v(b->rank(), 0);
            v[0] = 100;
            return v;
        }()));
        ParamModel m = make_model(b, 1, {psi});
        PuiseuxData pd = puiseux_package(m, 0);

        CHECK(det_z(pd.B) == 1);
        CHECK(det_z(pd.C) == 1);
        for (const auto& row : pd.B)
            for (const auto& e : row) CHECK(e >= 0);
        // (0,...,0,1) C^{-1} = (-p, d) is asserted inside puiseux_package;
        // recheck the d=1 block shape here
        if (pd.d == 1) {
            int r = m.frame.r;
            for (int i = 0; i < r; ++i) CHECK(pd.C[i][r] == 0);
            CHECK(pd.C[r][r] == 1);
        }
        ++count;
    }
    CHECK(count == 40);
}
