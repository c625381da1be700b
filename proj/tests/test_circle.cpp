#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ergosol/circle.hpp"

using namespace ergosol;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

DenjoyMap golden_map(int depth = 64) {
    auto rho = make_rotation_number(kGolden);
    auto sched = inverse_quadratic_schedule(depth + 1, 0.5);
    return build_denjoy(rho, sched, depth);
}

}  // namespace

TEST_CASE("continued fractions reject rationals") {
    CHECK_THROWS_WITH_AS(make_rotation_number(0.25), "rational rotation number", std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_rotation_number(0.5), "rational rotation number", std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_rotation_number(3.0 / 7.0), "rational rotation number",
                         std::invalid_argument);
}

TEST_CASE("continued fractions accept golden mean and sqrt2-1") {
    auto g = make_rotation_number(kGolden);
    CHECK(g.convergents.size() >= 20);
    // golden mean: all partial quotients 1, convergents are Fibonacci ratios
    CHECK(g.convergents[0].second == 1);
    CHECK(g.convergents[5].first == 8);
    CHECK(g.convergents[5].second == 13);

    auto s = make_rotation_number(std::sqrt(2.0) - 1.0);
    CHECK(s.convergents.size() >= 15);
}

TEST_CASE("inverse quadratic schedule") {
    auto s = inverse_quadratic_schedule(64, 0.5);
    CHECK(s.total == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.ratio_condition_ok());
    CHECK(s.length(3) == s.length(-3));
    CHECK(s.length(0) > s.length(1));
}

TEST_CASE("schedule exhausting the circle is rejected") {
    auto rho = make_rotation_number(kGolden);
    auto sched = inverse_quadratic_schedule(17, 1.2);
    CHECK_THROWS_WITH_AS(build_denjoy(rho, sched, 16), "gaps exhaust circle", std::invalid_argument);
}

TEST_CASE("gap-to-gap mapping is affine onto the successor") {
    auto dm = golden_map(32);
    for (int n = -32; n < 32; ++n) {
        const Interval& a = dm.gap(n);
        const Interval& b = dm.gap(n + 1);
        CHECK(std::fabs(dm.map.eval(a.lo) - b.lo) <= 1e-15);
        CHECK(std::fabs(dm.map.eval(a.hi) - b.hi) <= 1e-15);
        double mid = dm.map.eval(a.midpoint());
        CHECK(mid > b.lo);
        CHECK(mid < b.hi);
    }
}

TEST_CASE("semiconjugacy identity at every gap endpoint") {
    auto dm = golden_map();
    const double rho = dm.rho.value;
    double worst = 0.0;
    for (int n = -dm.depth; n <= dm.depth; ++n) {
        for (double x : {dm.gap(n).lo, dm.gap(n).hi}) {
            double lhs = dm.semiconjugacy.eval(dm.map.eval(x));
            double rhs = frac(dm.semiconjugacy.eval(x) + rho);
            worst = std::max(worst, circle_dist(lhs, rhs));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("denjoy map is strictly increasing on a dense grid") {
    auto dm = golden_map();
    CHECK(dm.map.strictly_increasing());
    const int n = 1000000;
    double prev = dm.map.lift_at(0.0);
    bool ok = true;
    for (int i = 1; i <= n; ++i) {
        double lift = dm.map.lift_at(static_cast<double>(i) / n < 1.0 ? static_cast<double>(i) / n
                                                                      : 0.9999999);
        if (!(lift > prev)) {
            ok = false;
            break;
        }
        prev = lift;
    }
    CHECK(ok);
}

TEST_CASE("rotation number estimates") {
    SUBCASE("rigid rotation is exact") {
        auto r = PwAffine::rotation(0.25);
        CHECK(rotation_number_estimate([&](double x) { return r.eval(x); }, 1000) == 0.25);
    }
    SUBCASE("identity gives zero") {
        auto id = PwAffine::identity();
        CHECK(rotation_number_estimate([&](double x) { return id.eval(x); }, 1000) == 0.0);
    }
    SUBCASE("denjoy map inherits the rotation number") {
        auto dm = golden_map();
        double est = rotation_number_estimate([&](double x) { return dm.map.eval(x); }, 100000);
        CHECK(std::fabs(est - kGolden) <= 1e-4);
    }
}

TEST_CASE("invariant measure") {
    auto dm = golden_map();
    auto mu = invariant_measure(dm, 64);
    auto tr = transversal_at_depth(dm, 64);
    REQUIRE(tr.bands.size() == 129);
    REQUIRE(mu.weights.size() == 129);

    SUBCASE("probability measure") {
        double total = 0.0;
        for (double w : mu.weights) total += w;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (double w : mu.weights) CHECK(w > 0.0);
    }

    SUBCASE("weights are semiconjugacy image lengths") {
        for (std::size_t i = 0; i < tr.bands.size(); ++i) {
            double img = forward_arc(dm.semiconjugacy.eval(tr.bands[i].lo),
                                     dm.semiconjugacy.eval(tr.bands[i].hi));
            CHECK(std::fabs(mu.weights[i] - img) <= 1e-12);
        }
    }

    SUBCASE("holonomy invariance on every band") {
        auto hinv = dm.map.inverse();
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.bands.size(); ++i) {
            Interval pre{hinv.eval(tr.bands[i].lo), hinv.eval(tr.bands[i].hi)};
            worst = std::max(worst, std::fabs(mu.mass(pre) - mu.weights[i]));
        }
        CHECK(worst <= 1e-12);
    }

    SUBCASE("half-split by semiconjugacy preimages") {
        // mass of pi^{-1}([0, 1/2)) is exactly 1/2
        double half_mass = 0.0;
        for (std::size_t i = 0; i < tr.bands.size(); ++i) {
            double a = dm.semiconjugacy.eval(tr.bands[i].lo);
            double b = dm.semiconjugacy.eval(tr.bands[i].hi);
            if (b <= 0.5 || b < a) {  // band image inside [0,1/2) (bands after wrap end <= small)
                if (a < 0.5 && (b <= 0.5 && a <= b)) half_mass += mu.weights[i];
            } else if (a < 0.5 && b > 0.5) {
                // split band: count the part below 1/2
                half_mass += 0.5 - a;
            }
        }
        CHECK(half_mass == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("nesting: deeper transversals refine coarser ones") {
    auto dm = golden_map(32);
    auto coarse = transversal_at_depth(dm, 16);
    auto fine = transversal_at_depth(dm, 17);
    for (const Interval& f : fine.bands) {
        bool inside = false;
        for (const Interval& c : coarse.bands)
            if (f.lo >= c.lo - 1e-15 && f.hi <= c.hi + 1e-15) {
                inside = true;
                break;
            }
        CHECK(inside);
    }
}

TEST_CASE("birkhoff averages") {
    auto dm = golden_map();
    auto sys = denjoy_system(dm, 64);

    SUBCASE("constant observable averages to one") {
        double a = birkhoff_average(sys, [](double) { return 1.0; }, sys.transversal.bands[0].midpoint(), 100);
        CHECK(a == 1.0);
    }

    SUBCASE("gap start is rejected") {
        double in_gap = dm.gap(0).midpoint();
        CHECK_THROWS_WITH_AS(birkhoff_average(sys, [](double) { return 1.0; }, in_gap, 10),
                             "point not on transversal", std::invalid_argument);
    }

    SUBCASE("band indicator converges to its measure") {
        // indicator of the union of the first 40 bands
        double muA = 0.0;
        for (int i = 0; i < 40; ++i) muA += sys.measure.weights[static_cast<std::size_t>(i)];
        auto obs = [&](double x) {
            int b = band_index(sys.transversal, x);
            return (b >= 0 && b < 40) ? 1.0 : 0.0;
        };
        double avg = birkhoff_average(sys, obs, sys.transversal.bands[3].midpoint(), 100000);
        CHECK(std::fabs(avg - muA) <= 0.01);
    }

    SUBCASE("spread diagnostic: small and shrinking") {
        auto d5 = birkhoff_spread(sys, 100, 100000);
        CHECK(d5.max_spread <= 0.01);
        CHECK(d5.max_error <= 0.01);
        auto d6 = birkhoff_spread(sys, 100, 1000000);
        CHECK(d6.max_spread < d5.max_spread);
    }
}

TEST_CASE("partition by mass") {
    auto dm = golden_map();
    auto tr = transversal_at_depth(dm, 64);
    auto mu = invariant_measure(dm, 64);

    SUBCASE("single chunk is everything") {
        auto p = partition_by_mass(tr, mu, {1.0});
        REQUIRE(p.parts.size() == 1);
        CHECK(p.parts[0].bands.size() == tr.bands.size());
    }

    SUBCASE("masses must sum to one") {
        CHECK_THROWS_WITH_AS(partition_by_mass(tr, mu, {0.5, 0.6}), "masses do not sum to 1",
                             std::invalid_argument);
        CHECK_THROWS_WITH_AS(partition_by_mass(tr, mu, {1.3, -0.3}), "masses must be positive",
                             std::invalid_argument);
    }

    SUBCASE("greedy split lands within one band weight") {
        double wmax = 0.0;
        for (double w : mu.weights) wmax = std::max(wmax, w);
        auto p = partition_by_mass(tr, mu, {0.3, 0.7});
        REQUIRE(p.parts.size() == 2);
        CHECK(std::fabs(p.masses[0] - 0.3) <= wmax);
        CHECK(p.max_residual <= wmax);
        CHECK(p.parts[0].bands.size() + p.parts[1].bands.size() == tr.bands.size());
    }

    SUBCASE("exact split matches to roundoff") {
        auto p = partition_by_mass_exact(tr, mu, {0.3, 0.7});
        REQUIRE(p.parts.size() == 2);
        CHECK(std::fabs(p.masses[0] - 0.3) <= 1e-12);
        CHECK(std::fabs(p.masses[1] - 0.7) <= 1e-12);
        CHECK(p.max_residual <= 1e-12);
        // refined transversal gained at most one split band
        CHECK(p.refined.bands.size() <= tr.bands.size() + 1);
    }
}

TEST_CASE("transport maps") {
    auto dm1 = golden_map(32);
    auto tr1 = transversal_at_depth(dm1, 32);
    auto mu1 = invariant_measure(dm1, 32);

    SUBCASE("identity transport on matching systems") {
        auto phi = transport_map(tr1, mu1, tr1, mu1);
        for (const Interval& b : tr1.bands) {
            CHECK(std::fabs(phi.eval(b.lo) - b.lo) <= 1e-12);
            CHECK(std::fabs(phi.eval(b.midpoint()) - b.midpoint()) <= 1e-12);
        }
    }

    SUBCASE("pushforward matches target weights exactly") {
        auto rho2 = make_rotation_number(std::sqrt(2.0) - 1.0);
        auto dm2 = build_denjoy(rho2, inverse_quadratic_schedule(33, 0.5), 32);
        auto tr2 = transversal_at_depth(dm2, 32);
        auto mu2 = invariant_measure(dm2, 32);
        auto phi = transport_map(tr1, mu1, tr2, mu2);

        double worst = 0.0;
        for (std::size_t i = 0; i < tr2.bands.size(); ++i) {
            double lo = phi.eval_inverse(tr2.bands[i].lo);
            double hi = phi.eval_inverse(tr2.bands[i].hi);
            worst = std::max(worst, std::fabs(mu1.mass({lo, hi}) - mu2.weights[i]));
        }
        CHECK(worst <= 1e-12);

        // monotone / cyclic-order preserving on band midpoints
        double prev = -1.0;
        bool monotone = true;
        for (const Interval& b : tr1.bands) {
            double y = phi.eval(b.midpoint());
            double rel = frac(y - phi.eval(tr1.bands[0].lo));
            if (rel < prev - 1e-13) monotone = false;
            prev = std::max(prev, rel);
        }
        CHECK(monotone);
    }

    SUBCASE("mass mismatch is rejected") {
        TransversalMeasure half = mu1;
        for (auto& c : half.cumulative.c) c *= 0.5;
        for (auto& w : half.weights) w *= 0.5;
        half.total *= 0.5;
        CHECK_THROWS_WITH_AS(transport_map(tr1, mu1, tr1, half), "mass mismatch",
                             std::invalid_argument);
    }
}

TEST_CASE("composed holonomy") {
    auto dm = golden_map(32);
    auto sys = denjoy_system(dm, 32);

    SUBCASE("identity pieces reduce to h1") {
        auto comp = compose_holonomy(dm.map, PwAffine::identity(), TransportMap::identity());
        for (const Interval& b : sys.transversal.bands) {
            double x = b.midpoint();
            CHECK(std::fabs(comp(x) - dm.map.eval(x)) <= 1e-12);
        }
    }

    SUBCASE("h1 identity and phi identity reduce to h2") {
        auto comp = compose_holonomy(PwAffine::identity(), dm.map, TransportMap::identity());
        for (const Interval& b : sys.transversal.bands) {
            double x = b.midpoint();
            CHECK(std::fabs(comp(x) - dm.map.eval(x)) <= 1e-12);
        }
    }

    SUBCASE("conjugating a trivial holonomy keeps the diagnostic") {
        // glue a trivial holonomy through a transport to a rescaled copy
        auto phi = transport_map(sys.transversal, sys.measure, sys.transversal, sys.measure);
        auto comp = compose_holonomy(dm.map, PwAffine::identity(), phi);
        auto diag = birkhoff_spread(sys.transversal, sys.measure,
                                    [&](double x) { return comp(x); }, 50, 100000);
        CHECK(diag.max_spread <= 0.01);
    }
}
