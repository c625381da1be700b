#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ergosol/forms.hpp"

using namespace ergosol;

TEST_CASE("trig poly algebra") {
    SUBCASE("d d g vanishes identically") {
        // g = sin(2 pi x) cos(2 pi y)
        TrigPoly g = TrigPoly::monomial(2, {1, 0, 0}, true) * TrigPoly::monomial(2, {0, 1, 0}, false);
        KForm dg = exterior_derivative(KForm::scalar(SmoothFunction::trig(g)));
        KForm ddg = exterior_derivative(dg);
        for (const auto& [mask, f] : ddg.comps) {
            REQUIRE(f.has_trig());
            CHECK(f.trig_poly().max_abs_coeff() == 0.0);
        }
    }

    SUBCASE("derivative of a constant form vanishes") {
        KForm c = KForm::basis(2, 1);  // dx with constant coefficient
        KForm dc = exterior_derivative(c);
        for (const auto& [mask, f] : dc.comps) CHECK(f.trig_poly().max_abs_coeff() == 0.0);
    }

    SUBCASE("d(sin(2 pi x) dy) = 2 pi cos(2 pi x) dx^dy") {
        KForm w = KForm::zero(2, 1);
        w.comps.emplace_back(2, SmoothFunction::trig(TrigPoly::monomial(2, {1, 0, 0}, true)));
        KForm dw = exterior_derivative(w);
        REQUIRE(dw.comps.size() == 1);
        CHECK(dw.comps[0].first == 3);
        const TrigPoly& c = dw.comps[0].second.trig_poly();
        REQUIRE(c.terms().size() == 1);
        CHECK(!c.terms()[0].is_sin);
        CHECK(c.terms()[0].k == std::array<int, 3>{1, 0, 0});
        CHECK(c.terms()[0].coeff == doctest::Approx(kTwoPi).epsilon(1e-15));
    }

    SUBCASE("top-degree derivative is rejected") {
        KForm vol = KForm::basis(2, 3);
        CHECK_THROWS_WITH_AS(exterior_derivative(vol), "top degree", std::invalid_argument);
    }
}

TEST_CASE("wedge products") {
    Rng rng(2024);

    SUBCASE("dx ^ dy = - dy ^ dx") {
        KForm dx = KForm::basis(2, 1), dy = KForm::basis(2, 2);
        KForm a = wedge(dx, dy), b = wedge(dy, dx);
        for (int i = 0; i < 1000; ++i) {
            Vec p = vec2(rng.uniform(), rng.uniform());
            CHECK(a.comps[0].second.value(p) == -b.comps[0].second.value(p));
        }
    }

    SUBCASE("0-form wedge is the pointwise product") {
        SmoothFunction f = SmoothFunction::trig(TrigPoly::monomial(2, {1, 0, 0}, false));
        SmoothFunction g = SmoothFunction::trig(TrigPoly::monomial(2, {0, 2, 0}, true));
        KForm prod = wedge(KForm::scalar(f), KForm::scalar(g));
        for (int i = 0; i < 100; ++i) {
            Vec p = vec2(rng.uniform(), rng.uniform());
            CHECK(prod.comps[0].second.value(p) ==
                  doctest::Approx(f.value(p) * g.value(p)).epsilon(1e-14));
        }
    }

    SUBCASE("degree overflow is rejected") {
        KForm dxy = KForm::basis(2, 3);
        CHECK_THROWS_WITH_AS(wedge(dxy, KForm::basis(2, 1)), "degree overflow", std::invalid_argument);
    }

    SUBCASE("dF ^ dy integrates like dF/dx") {
        SmoothFunction wind = bump(2, SupportBox::box(vec2(0.1, 0.3), vec2(0.7, 0.6)), 0.08);
        SmoothFunction F = SmoothFunction::trig(TrigPoly::monomial(2, {1, 0, 0}, true)) * wind;
        KForm dF = exterior_derivative(KForm::scalar(F));
        KForm w = wedge(dF, KForm::basis(2, 2));
        double lhs = integrate_torus(w, 256);
        double rhs = 0.0;
        const int res = 256;
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j)
                rhs += F.gradient(vec2(static_cast<double>(j) / res, static_cast<double>(i) / res))[0];
        rhs /= res * static_cast<double>(res);
        CHECK(std::fabs(lhs - rhs) <= 1e-6);
    }
}

TEST_CASE("torus quadrature") {
    SUBCASE("volume form integrates to one") {
        CHECK(std::fabs(integrate_torus(KForm::basis(2, 3), 64) - 1.0) <= 1e-12);
        CHECK(std::fabs(integrate_torus(KForm::basis(3, 7), 16) - 1.0) <= 1e-12);
    }

    SUBCASE("sin^2 averages to a half") {
        TrigPoly s = TrigPoly::monomial(2, {1, 0, 0}, true);
        KForm w = wedge(KForm::scalar(SmoothFunction::trig(s * s)), KForm::basis(2, 3));
        CHECK(std::fabs(integrate_torus(w, 256) - 0.5) <= 1e-9);
    }

    SUBCASE("exact for trig polynomials below Nyquist") {
        TrigPoly p = TrigPoly::monomial(2, {3, -2, 0}, false, 0.7) +
                     TrigPoly::monomial(2, {1, 3, 0}, true, -0.3) + TrigPoly::constant(2, 0.25);
        KForm w = wedge(KForm::scalar(SmoothFunction::trig(p)), KForm::basis(2, 3));
        CHECK(std::fabs(integrate_torus(w, 12) - 0.25) <= 1e-12);
    }

    SUBCASE("d beta integrates to zero (Stokes on a closed manifold)") {
        KForm beta = KForm::zero(2, 1);
        beta.comps.emplace_back(1, SmoothFunction::trig(TrigPoly::monomial(2, {2, 1, 0}, true, 0.9)));
        beta.comps.emplace_back(2, SmoothFunction::trig(TrigPoly::monomial(2, {1, -1, 0}, false, 1.4)));
        CHECK(std::fabs(integrate_torus(exterior_derivative(beta), 64)) <= 1e-9);
    }

    SUBCASE("non-top-degree form is rejected") {
        CHECK_THROWS_WITH_AS(integrate_torus(KForm::basis(2, 1), 64), "not a top-degree form",
                             std::invalid_argument);
    }
}

TEST_CASE("line integrals") {
    SUBCASE("horizontal loop winds once through dx and not through dy") {
        Polyline loop;
        loop.dim = 2;
        loop.pts = {vec2(0, 0), vec2(1, 0)};
        CHECK(std::fabs(line_integral(loop, KForm::basis(2, 1)) - 1.0) <= 1e-12);
        CHECK(std::fabs(line_integral(loop, KForm::basis(2, 2))) <= 1e-12);
    }

    SUBCASE("diagonal segment picks up slope through dy") {
        double rho = 0.381966011250105;
        Polyline seg;
        seg.dim = 2;
        seg.pts = {vec2(0, 0), vec2(1, rho)};
        CHECK(std::fabs(line_integral(seg, KForm::basis(2, 2)) - rho) <= 1e-9);
    }

    SUBCASE("parametric and polyline integrals agree") {
        KForm w = KForm::zero(2, 1);
        w.comps.emplace_back(1, SmoothFunction::trig(TrigPoly::monomial(2, {1, 2, 0}, false)));
        w.comps.emplace_back(2, SmoothFunction::trig(TrigPoly::monomial(2, {0, 1, 0}, true)));
        Polyline seg;
        seg.dim = 2;
        seg.pts = {vec2(0.1, 0.2), vec2(0.8, 0.9)};
        ParametricCurve par;
        par.dim = 2;
        par.position = [](double t) { return vec2(0.1 + 0.7 * t, 0.2 + 0.7 * t); };
        par.velocity = [](double) { return vec2(0.7, 0.7); };
        CHECK(std::fabs(line_integral(seg, w) - line_integral(par, w)) <= 1e-9);
    }
}

TEST_CASE("bump functions") {
    // transitions need width >= ~0.13 for the 1e-6 finite-difference contract
    SupportBox box = SupportBox::box(vec2(0.3, 0.4), vec2(0.5, 0.7));
    SmoothFunction b = bump(2, box, 0.15);

    SUBCASE("plateau and decay") {
        CHECK(b.value(vec2(0.4, 0.55)) == 1.0);
        CHECK(b.value(vec2(0.3, 0.4)) == 1.0);
        CHECK(b.value(vec2(0.1, 0.55)) == 0.0);
        CHECK(b.value(vec2(0.4, 0.9)) == 0.0);
        double mid = b.value(vec2(0.22, 0.55));
        CHECK(mid > 0.0);
        CHECK(mid < 1.0);
    }

    SUBCASE("gradient matches central differences") {
        Rng rng(7);
        const double h = 1e-5;
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            Vec p = vec2(rng.uniform(), rng.uniform());
            Vec g = b.gradient(p);
            for (int a = 0; a < 2; ++a) {
                Vec pp = p, pm = p;
                pp[a] += h;
                pm[a] -= h;
                double fd = (b.value(pp) - b.value(pm)) / (2 * h);
                worst = std::max(worst, std::fabs(fd - g[a]));
            }
        }
        CHECK(worst <= 1e-6);
    }

    SUBCASE("invalid margin is rejected") {
        CHECK_THROWS_WITH_AS(bump(2, box, 0.0), "margin must be positive", std::invalid_argument);
    }
}

TEST_CASE("partition of unity") {
    SUBCASE("a box leaving a strip uncovered is detected") {
        std::vector<SupportBox> cover{SupportBox::box(vec2(0.05, 0.05), vec2(0.85, 0.85))};
        CHECK_THROWS_WITH_AS(partition_of_unity(2, cover, 0.05), "not a cover", std::invalid_argument);
    }

    SUBCASE("four-box cover sums to one and stays supported") {
        std::vector<SupportBox> cover;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                cover.push_back(
                    SupportBox::box(vec2(0.5 * j, 0.5 * i), vec2(0.5 * j + 0.5, 0.5 * i + 0.5)));
        auto rho = partition_of_unity(2, cover, 0.12);
        REQUIRE(rho.size() == 4);
        Rng rng(11);
        double worst = 0.0;
        bool nonneg = true;
        for (int i = 0; i < 10000; ++i) {
            Vec p = vec2(rng.uniform(), rng.uniform());
            double s = 0.0;
            for (const auto& r : rho) {
                double v = r.value(p);
                if (v < 0.0) nonneg = false;
                s += v;
            }
            worst = std::max(worst, std::fabs(s - 1.0));
        }
        CHECK(nonneg);
        CHECK(worst <= 1e-12);

        // each piece vanishes off its grown box
        int outside_checked = 0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const SupportBox& sup = rho[i].support();
            for (int t = 0; t < 400; ++t) {
                Vec p = vec2(rng.uniform(), rng.uniform());
                bool inside = true;
                for (int a = 0; a < 2; ++a) {
                    double rel = frac(p[a] - sup.lo[a]);
                    if (rel > sup.hi[a] - sup.lo[a]) inside = false;
                }
                if (!inside) {
                    CHECK(rho[i].value(p) == 0.0);
                    ++outside_checked;
                }
            }
        }
        CHECK(outside_checked > 0);
    }
}

TEST_CASE("dictionary construction") {
    SUBCASE("degree zero holds exactly the closed basis forms") {
        Dictionary d = build_dictionary(2, 1, 0);
        REQUIRE(d.size() == 2);
        CHECK(d.entries[0].flag == EntryFlag::closed);
        CHECK(d.entries[1].flag == EntryFlag::closed);
        CHECK(d.entries[0].label == "dx");
        CHECK(d.entries[1].label == "dy");
    }

    SUBCASE("entry count matches the combinatorial formula") {
        for (int D : {1, 2, 3}) {
            Dictionary d = build_dictionary(2, 1, D);
            int monomials = ((2 * D + 1) * (2 * D + 1) - 1) / 2 * 2;
            CHECK(d.size() == 2 + 2 * monomials + monomials);
        }
    }

    SUBCASE("exact entries reproduce d(primitive)") {
        Dictionary d = build_dictionary(2, 1, 2);
        Rng rng(5);
        for (const auto& e : d.entries) {
            if (e.flag != EntryFlag::exact) continue;
            REQUIRE(e.primitive.has_value());
            KForm dg = exterior_derivative(KForm::scalar(SmoothFunction::trig(*e.primitive)));
            REQUIRE(dg.comps.size() == e.form.comps.size());
            for (int t = 0; t < 50; ++t) {
                Vec p = vec2(rng.uniform(), rng.uniform());
                for (std::size_t c = 0; c < dg.comps.size(); ++c)
                    CHECK(std::fabs(dg.comps[c].second.value(p) - e.form.comps[c].second.value(p)) <=
                          1e-12);
            }
        }
    }

    SUBCASE("T^3 dictionary contains the three basis forms") {
        Dictionary d = build_dictionary(3, 1, 1);
        CHECK(d.entries[0].label == "dx");
        CHECK(d.entries[1].label == "dy");
        CHECK(d.entries[2].label == "dz");
        int monomials = ((3 * 3 * 3) - 1) / 2 * 2;
        CHECK(d.size() == 3 + 3 * monomials + monomials);
    }
}

TEST_CASE("weak distance") {
    Dictionary d = build_dictionary(2, 1, 1);
    Rng rng(99);
    auto rand_vec = [&]() {
        CurrentVector v;
        v.dict_id = d.id;
        for (int i = 0; i < d.size(); ++i) v.pairings.push_back(rng.uniform(-2, 2));
        return v;
    };

    SUBCASE("identity and symmetry") {
        CurrentVector a = rand_vec(), b = rand_vec();
        CHECK(weak_distance(a, a) == 0.0);
        CHECK(weak_distance(a, b) == weak_distance(b, a));
    }

    SUBCASE("triangle inequality on random triples") {
        for (int t = 0; t < 100; ++t) {
            CurrentVector a = rand_vec(), b = rand_vec(), c = rand_vec();
            CHECK(weak_distance(a, c) <= weak_distance(a, b) + weak_distance(b, c) + 1e-15);
        }
    }

    SUBCASE("dictionary mismatch is rejected") {
        CurrentVector a = rand_vec();
        CurrentVector b = a;
        b.dict_id ^= 1;
        CHECK_THROWS_WITH_AS(weak_distance(a, b), "dictionary mismatch", std::invalid_argument);
    }
}

TEST_CASE("compiled forms match their source") {
    Dictionary d = build_dictionary(2, 1, 2);
    Rng rng(123);
    for (const auto& e : d.entries) {
        Compiled1Form cf = compile_one_form(e.form);
        for (int t = 0; t < 20; ++t) {
            Vec p = vec2(rng.uniform(), rng.uniform());
            Vec v = vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
            double direct = 0.0;
            for (const auto& [mask, f] : e.form.comps) {
                int axis = mask == 1 ? 0 : 1;
                direct += f.value(p) * v[axis];
            }
            CHECK(std::fabs(cf.pair(p, v) - direct) <= 1e-13);
        }
    }
}
