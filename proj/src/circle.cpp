#include "ergosol/circle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ergosol/parallel.hpp"

namespace ergosol {

// ---------------------------------------------------------------------------
// PwAffine

PwAffine PwAffine::from_circle_values(std::vector<double> xs, const std::vector<double>& y_circle) {
    if (xs.size() != y_circle.size() || xs.empty())
        throw std::invalid_argument("PwAffine: breakpoint/value size mismatch");
    PwAffine f;
    f.xs_ = std::move(xs);
    f.ys_.resize(y_circle.size());
    double carry = 0.0;
    f.ys_[0] = y_circle[0];
    for (std::size_t i = 1; i < y_circle.size(); ++i) {
        if (y_circle[i] < y_circle[i - 1]) carry += 1.0;  // wrapped once
        f.ys_[i] = y_circle[i] + carry;
        if (f.ys_[i] < f.ys_[i - 1])
            throw std::invalid_argument("PwAffine: values not monotone");
    }
    if (f.ys_.back() > f.ys_.front() + 1.0 + 1e-12)
        throw std::invalid_argument("PwAffine: winding exceeds one");
    for (std::size_t i = 1; i < f.xs_.size(); ++i)
        if (!(f.xs_[i] > f.xs_[i - 1]))
            throw std::invalid_argument("PwAffine: breakpoints not sorted");
    return f;
}

PwAffine PwAffine::identity() {
    PwAffine f;
    f.xs_ = {0.0};
    f.ys_ = {0.0};
    return f;
}

PwAffine PwAffine::rotation(double rho) {
    PwAffine f;
    f.xs_ = {0.0};
    f.ys_ = {rho};
    return f;
}

double PwAffine::lift_at(double t) const {
    const std::size_t n = xs_.size();
    if (n == 1) {
        // single breakpoint: slope-one rotation through (xs_[0], ys_[0])
        return ys_[0] + (t - xs_[0]);
    }
    double tt = t;
    double shift = 0.0;
    if (tt < xs_[0]) {
        tt += 1.0;
        shift = -1.0;
    }
    // segment index: greatest i with xs_[i] <= tt (xs_ extended by xs_[0]+1)
    std::size_t i;
    if (tt >= xs_[n - 1]) {
        i = n - 1;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), tt) - xs_.begin()) - 1;
    }
    const double x0 = xs_[i];
    if (tt == x0) return ys_[i] + shift;
    const double x1 = (i + 1 < n) ? xs_[i + 1] : xs_[0] + 1.0;
    const double y0 = ys_[i];
    const double y1 = (i + 1 < n) ? ys_[i + 1] : ys_[0] + 1.0;
    return y0 + (tt - x0) * ((y1 - y0) / (x1 - x0)) + shift;
}

double PwAffine::eval(double t) const { return frac(lift_at(frac(t))); }

double PwAffine::displacement(double t) const { return frac(eval(t) - t); }

bool PwAffine::strictly_increasing() const {
    for (std::size_t i = 1; i < ys_.size(); ++i)
        if (!(ys_[i] > ys_[i - 1])) return false;
    if (xs_.size() > 1 && !(ys_.front() + 1.0 > ys_.back())) return false;
    return true;
}

PwAffine PwAffine::inverse() const {
    if (!strictly_increasing())
        throw std::invalid_argument("PwAffine: inverse of non-strict map");
    const std::size_t n = xs_.size();
    // rotate so the fractional parts of ys_ come out sorted
    std::size_t r = 0;
    double best = frac(ys_[0]);
    for (std::size_t i = 1; i < n; ++i) {
        double fy = frac(ys_[i]);
        if (fy < best) {
            best = fy;
            r = i;
        }
    }
    PwAffine g;
    g.xs_.resize(n);
    g.ys_.resize(n);
    double carry = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t i = (r + j) % n;
        g.xs_[j] = frac(ys_[i]);
        if (j > 0 && xs_[i] + carry < g.ys_[j - 1]) carry += 1.0;
        g.ys_[j] = xs_[i] + carry;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Cumulative

double Cumulative::at(double pos) const {
    const double x0 = x.front();
    double p = x0 + frac(pos - x0);
    std::size_t i;
    if (p >= x.back()) {
        i = x.size() - 1;
        return c[i];
    }
    i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), p) - x.begin());
    if (i == 0) return c[0];
    --i;
    if (p == x[i]) return c[i];
    const double dx = x[i + 1] - x[i];
    if (dx <= 0.0) return c[i];
    return c[i] + (p - x[i]) * ((c[i + 1] - c[i]) / dx);
}

double Cumulative::inverse_at(double level) const {
    if (level <= c.front()) return x.front();
    if (level >= c.back()) return x.back();
    std::size_t i = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), level) - c.begin());
    if (c[i] == level) {
        while (i > 0 && c[i - 1] == level) --i;  // leftmost
        return x[i];
    }
    --i;
    const double dc = c[i + 1] - c[i];
    return x[i] + (level - c[i]) * ((x[i + 1] - x[i]) / dc);
}

double Cumulative::inverse_at_right(double level) const {
    if (level < c.front()) return x.front();
    if (level >= c.back()) return x.back();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), level) - c.begin());
    // c[i] > level >= c[i-1]
    if (i == 0) return x.front();
    std::size_t j = i - 1;
    if (c[j] == level) return x[j];  // rightmost index with this value
    const double dc = c[i] - c[j];
    return x[j] + (level - c[j]) * ((x[i] - x[j]) / dc);
}

// ---------------------------------------------------------------------------
// TransportMap

TransportMap TransportMap::identity() {
    TransportMap m;
    m.s = {0.0, 1.0};
    m.t = {0.0, 1.0};
    return m;
}

namespace {

double transport_eval(const std::vector<double>& a, const std::vector<double>& b, double x) {
    const double a0 = a.front();
    double p = a0 + frac(x - a0);
    std::size_t i;
    if (p >= a.back()) return frac(b.back());
    i = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), p) - a.begin());
    if (i == 0) return frac(b[0]);
    --i;
    if (p == a[i]) return frac(b[i]);
    const double da = a[i + 1] - a[i];
    if (da <= 0.0) return frac(b[i + 1]);
    return frac(b[i] + (p - a[i]) * ((b[i + 1] - b[i]) / da));
}

}  // namespace

double TransportMap::eval(double x) const { return transport_eval(s, t, x); }
double TransportMap::eval_inverse(double y) const { return transport_eval(t, s, y); }

// ---------------------------------------------------------------------------
// Continued fractions

RotationNumber make_rotation_number(double value, int cf_depth) {
    if (!(value > 0.0 && value < 1.0))
        throw std::invalid_argument("rotation number must lie in (0,1)");
    // exact rational p/2^k behind the double
    int e = 0;
    double m = std::frexp(value, &e);  // value = m * 2^e, m in [0.5, 1)
    std::uint64_t num = static_cast<std::uint64_t>(std::ldexp(m, 53));
    int k = 53 - e;
    while (k > 63) {  // subnormal-small values: coarsen, they are rejected anyway
        num >>= 1;
        --k;
        if (num == 0) throw std::invalid_argument("rational rotation number");
    }
    std::uint64_t den = 1ull << k;

    RotationNumber r;
    r.value = value;
    r.cf_depth = cf_depth;

    // "Rational to working depth": the value sits within double precision of
    // some p/q with q <= kSmallDenominator. In the exact expansion of the
    // double that shows up either as outright termination at a small
    // denominator, or as a huge partial quotient while the convergent
    // denominator is still small (3.0/7.0 expands as [0;2,3,~5e14,...]).
    // Genuine irrationals keep their true, moderate quotients until the
    // convergent denominators pass ~1e8, far beyond kSmallDenominator.
    constexpr std::uint64_t kSmallDenominator = 1ull << 20;
    constexpr std::uint64_t kHugeQuotient = 8000;

    // Euclid on den/num: partial quotients of [0; a1, a2, ...]
    std::uint64_t u = den, v = num;
    int quotients = 0;
    std::int64_t h1 = 0, h0 = 1;  // convergent numerators  (h_{0}=a0=0, h_{-1}=1)
    std::int64_t k1 = 1, k0 = 0;  // convergent denominators (k_{0}=1, k_{-1}=0)
    bool overflow = false;
    while (v != 0 && quotients < cf_depth) {
        std::uint64_t a = u / v;
        std::uint64_t rem = u % v;
        ++quotients;
        if (!overflow && a >= kHugeQuotient && static_cast<std::uint64_t>(k1) <= kSmallDenominator)
            throw std::invalid_argument("rational rotation number");
        if (!overflow && a < (1ull << 62)) {
            double guard = static_cast<double>(a) * static_cast<double>(k1) + static_cast<double>(k0);
            if (guard < 9.0e18) {
                std::int64_t hn = static_cast<std::int64_t>(a) * h1 + h0;
                std::int64_t kn = static_cast<std::int64_t>(a) * k1 + k0;
                h0 = h1;
                h1 = hn;
                k0 = k1;
                k1 = kn;
                r.convergents.emplace_back(h1, k1);
            } else {
                overflow = true;
            }
        } else {
            overflow = true;
        }
        u = v;
        v = rem;
    }
    if (v == 0 && !overflow && static_cast<std::uint64_t>(k1) <= kSmallDenominator)
        throw std::invalid_argument("rational rotation number");
    return r;
}

// ---------------------------------------------------------------------------
// Gap schedule

bool GapSchedule::ratio_condition_ok() const {
    // l_{n+1}/l_n must approach 1 from below, monotonically in the tail
    // (small indices are irrelevant to the smoothness of the extension).
    for (int sgn : {1, -1}) {
        double prev = 0.0;
        for (int n = 0; n + 1 <= range; ++n) {
            double ratio = length(sgn * (n + 1)) / length(sgn * n);
            if (ratio > 1.0 + 1e-12) return false;
            if (n >= 3 && ratio + 1e-15 < prev) return false;
            prev = ratio;
        }
    }
    return true;
}

GapSchedule inverse_quadratic_schedule(int range, double total) {
    GapSchedule s;
    s.range = range;
    s.lengths.resize(static_cast<std::size_t>(2 * range + 1));
    double raw = 0.0;
    for (int n = -range; n <= range; ++n) raw += 1.0 / (static_cast<double>(n) * n + 4.0);
    const double c = total / raw;
    for (int n = -range; n <= range; ++n)
        s.lengths[static_cast<std::size_t>(n + range)] = c / (static_cast<double>(n) * n + 4.0);
    s.total = 0.0;
    for (double l : s.lengths) s.total += l;
    return s;
}

// ---------------------------------------------------------------------------
// Denjoy construction

DenjoyMap build_denjoy(const RotationNumber& rho, const GapSchedule& schedule, int depth) {
    if (depth < 1) throw std::invalid_argument("depth must be positive");
    if (depth > schedule.range) throw std::invalid_argument("depth exceeds schedule range");
    if (!(schedule.total < 1.0)) throw std::invalid_argument("gaps exhaust circle");

    const int N = depth;
    const int edge = N + 1;
    const double plateau_len = schedule.length(std::min(edge, schedule.range)) / 16.0;

    // inserted intervals: gaps |m| <= N plus edge plateaus at +-(N+1)
    struct Ins {
        int m;
        double pos;     // orbit point
        double len;     // pre-normalization length
        double lo, hi;  // final interval
    };
    std::vector<Ins> ins;
    ins.reserve(static_cast<std::size_t>(2 * edge + 1));
    double total_len = 0.0;
    for (int m = -edge; m <= edge; ++m) {
        double len = (std::abs(m) <= N) ? schedule.length(m) : plateau_len;
        ins.push_back({m, frac(m * rho.value), len, 0.0, 0.0});
        total_len += len;
    }
    const double scale = 1.0 / (1.0 + total_len);

    std::vector<int> order(ins.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ins[a].pos < ins[b].pos; });

    double acc = 0.0;
    for (int idx : order) {
        Ins& g = ins[static_cast<std::size_t>(idx)];
        g.lo = (g.pos + acc) * scale;
        g.hi = g.lo + g.len * scale;
        acc += g.len;
    }

    auto by_m = [&](int m) -> const Ins& { return ins[static_cast<std::size_t>(m + edge)]; };

    // h anchors: endpoints of I_m for m in [-(N+1), N] map to endpoints of I_{m+1}
    std::vector<std::pair<double, double>> anchors;
    anchors.reserve(2 * ins.size());
    for (int m = -edge; m <= N; ++m) {
        const Ins& a = by_m(m);
        const Ins& b = by_m(m + 1);
        anchors.emplace_back(a.lo, b.lo);
        anchors.emplace_back(a.hi, b.hi);
    }
    std::sort(anchors.begin(), anchors.end());
    {
        std::vector<double> xs, yc;
        xs.reserve(anchors.size());
        yc.reserve(anchors.size());
        for (auto& [x, y] : anchors) {
            xs.push_back(x);
            yc.push_back(y);
        }
        DenjoyMap dm;
        dm.rho = rho;
        dm.schedule = schedule;
        dm.depth = N;
        dm.map = PwAffine::from_circle_values(std::move(xs), yc);
        if (!dm.map.strictly_increasing())
            throw std::runtime_error("denjoy construction produced a non-strict map");

        // semiconjugacy: every inserted interval collapses to its orbit point
        std::vector<std::pair<double, double>> pts;
        pts.reserve(2 * ins.size());
        for (const Ins& g : ins) {
            pts.emplace_back(g.lo, g.pos);
            pts.emplace_back(g.hi, g.pos);
        }
        std::sort(pts.begin(), pts.end());
        std::vector<double> pxs, pyc;
        for (auto& [x, y] : pts) {
            pxs.push_back(x);
            pyc.push_back(y);
        }
        dm.semiconjugacy = PwAffine::from_circle_values(std::move(pxs), pyc);

        dm.gaps.resize(static_cast<std::size_t>(2 * N + 1));
        for (int m = -N; m <= N; ++m) dm.gaps[static_cast<std::size_t>(m + N)] = {by_m(m).lo, by_m(m).hi};
        dm.edge_plateau_lo = {by_m(-edge).lo, by_m(-edge).hi};
        dm.edge_plateau_hi = {by_m(edge).lo, by_m(edge).hi};
        return dm;
    }
}

// ---------------------------------------------------------------------------
// Transversal and measure

CantorTransversal transversal_at_depth(const DenjoyMap& dm, int depth) {
    if (depth < 0 || depth > dm.depth) throw std::invalid_argument("transversal depth exceeds map depth");
    std::vector<Interval> gaps;
    gaps.reserve(static_cast<std::size_t>(2 * depth + 1));
    for (int n = -depth; n <= depth; ++n) gaps.push_back(dm.gap(n));
    std::sort(gaps.begin(), gaps.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    CantorTransversal tr;
    tr.depth = depth;
    // gap I_0 starts at 0, so bands never straddle the origin
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        double lo = gaps[i].hi;
        double hi = (i + 1 < gaps.size()) ? gaps[i + 1].lo : 1.0;
        tr.bands.push_back({lo, hi});
    }
    return tr;
}

namespace {

Cumulative cumulative_from_pi(const PwAffine& pi) {
    // cut at 0 (left endpoint of gap I_0); pi(0) = 0
    Cumulative c;
    const auto& xs = pi.breakpoints();
    const auto& ys = pi.lift_values();
    c.x.reserve(xs.size() + 1);
    c.c.reserve(xs.size() + 1);
    const double base = ys[0];  // pi lift at xs[0] = 0
    for (std::size_t i = 0; i < xs.size(); ++i) {
        c.x.push_back(xs[i]);
        c.c.push_back(ys[i] - base);
    }
    c.x.push_back(xs[0] + 1.0);
    c.c.push_back(1.0);
    return c;
}

}  // namespace

double TransversalMeasure::mass(const Interval& iv) const {
    double a = cumulative.at(iv.lo);
    double b = cumulative.at(iv.hi);
    double m = b - a;
    if (m < 0.0) m += total;
    return m;
}

TransversalMeasure invariant_measure(const DenjoyMap& dm, int depth) {
    CantorTransversal tr = transversal_at_depth(dm, depth);
    TransversalMeasure mu;
    mu.cumulative = cumulative_from_pi(dm.semiconjugacy);
    mu.total = mu.cumulative.total();
    mu.weights.reserve(tr.bands.size());
    for (const Interval& b : tr.bands) mu.weights.push_back(mu.mass(b));
    return mu;
}

HolonomySystem denjoy_system(const DenjoyMap& dm, int depth) {
    HolonomySystem sys;
    sys.transversal = transversal_at_depth(dm, depth);
    sys.measure = invariant_measure(dm, depth);
    sys.map = dm.map;
    return sys;
}

HolonomySystem uniform_rotation_system(double rho, int bands) {
    if (bands < 1) throw std::invalid_argument("need at least one band");
    constexpr double kMicroGap = 1e-9;
    HolonomySystem sys;
    sys.transversal.depth = 0;
    sys.map = PwAffine::rotation(rho);
    const double w = 1.0 / bands;
    Cumulative& c = sys.measure.cumulative;
    for (int i = 0; i < bands; ++i) {
        double lo = i * w + (i == 0 ? 0.0 : 0.5 * kMicroGap);
        double hi = (i + 1) * w - 0.5 * kMicroGap;
        sys.transversal.bands.push_back({lo, hi});
    }
    c.x = {0.0, 1.0};
    c.c = {0.0, 1.0};
    sys.measure.total = 1.0;
    for (const Interval& b : sys.transversal.bands) sys.measure.weights.push_back(sys.measure.mass(b));
    return sys;
}

int band_index(const CantorTransversal& tr, double p) {
    double x = frac(p);
    const auto& bands = tr.bands;
    auto it = std::upper_bound(bands.begin(), bands.end(), x,
                               [](double v, const Interval& b) { return v < b.lo; });
    if (it == bands.begin()) return -1;
    int i = static_cast<int>(it - bands.begin()) - 1;
    return (x <= bands[static_cast<std::size_t>(i)].hi) ? i : -1;
}

// ---------------------------------------------------------------------------
// Birkhoff diagnostics

double birkhoff_average(const HolonomySystem& system, const std::function<double(double)>& observable,
                        double start, std::int64_t iterations) {
    if (iterations < 1) throw std::invalid_argument("iterations must be positive");
    if (band_index(system.transversal, start) < 0)
        throw std::invalid_argument("point not on transversal");
    double acc = 0.0;
    double x = frac(start);
    for (std::int64_t i = 0; i < iterations; ++i) {
        acc += observable(x);
        x = system.map.eval(x);
    }
    return acc / static_cast<double>(iterations);
}

SpreadDiagnostic birkhoff_spread(const CantorTransversal& tr, const TransversalMeasure& mu,
                                 const std::function<double(double)>& map, int n_starts,
                                 std::int64_t iterations, int battery) {
    const int nb = static_cast<int>(tr.bands.size());
    battery = std::min(battery, nb);

    // battery: indicators of the first k_j bands in cyclic order
    std::vector<int> prefix(static_cast<std::size_t>(battery));
    for (int j = 0; j < battery; ++j)
        prefix[static_cast<std::size_t>(j)] = std::max(1, ((j + 1) * nb) / (battery + 1));

    std::vector<double> mu_prefix(static_cast<std::size_t>(battery), 0.0);
    {
        std::vector<double> cumw(static_cast<std::size_t>(nb + 1), 0.0);
        for (int i = 0; i < nb; ++i) cumw[static_cast<std::size_t>(i + 1)] = cumw[static_cast<std::size_t>(i)] + mu.weights[static_cast<std::size_t>(i)];
        for (int j = 0; j < battery; ++j) mu_prefix[static_cast<std::size_t>(j)] = cumw[static_cast<std::size_t>(prefix[static_cast<std::size_t>(j)])] / mu.total;
    }

    std::vector<double> starts(static_cast<std::size_t>(n_starts));
    for (int s = 0; s < n_starts; ++s)
        starts[static_cast<std::size_t>(s)] = frac(mu.cumulative.inverse_at((s + 0.5) / n_starts * mu.total));

    // per-start band visit counts; prefix indicator averages fall out of them
    std::vector<std::vector<double>> avg(static_cast<std::size_t>(n_starts),
                                         std::vector<double>(static_cast<std::size_t>(battery), 0.0));
    par::parallel_for(n_starts, [&](std::int64_t s) {
        std::vector<std::int64_t> count(static_cast<std::size_t>(nb), 0);
        double x = starts[static_cast<std::size_t>(s)];
        for (std::int64_t n = 0; n < iterations; ++n) {
            int b = band_index(tr, x);
            if (b >= 0) ++count[static_cast<std::size_t>(b)];
            x = map(x);
        }
        std::int64_t run = 0;
        int j = 0;
        for (int b = 0; b < nb && j < battery; ++b) {
            run += count[static_cast<std::size_t>(b)];
            while (j < battery && prefix[static_cast<std::size_t>(j)] == b + 1) {
                avg[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] =
                    static_cast<double>(run) / static_cast<double>(iterations);
                ++j;
            }
        }
    });

    SpreadDiagnostic d;
    d.n_starts = n_starts;
    d.iterations = iterations;
    d.spreads.resize(static_cast<std::size_t>(battery));
    for (int j = 0; j < battery; ++j) {
        double lo = avg[0][static_cast<std::size_t>(j)], hi = lo;
        for (int s = 1; s < n_starts; ++s) {
            lo = std::min(lo, avg[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)]);
            hi = std::max(hi, avg[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)]);
        }
        d.spreads[static_cast<std::size_t>(j)] = hi - lo;
        d.max_spread = std::max(d.max_spread, hi - lo);
        d.max_error = std::max(d.max_error, std::max(std::fabs(hi - mu_prefix[static_cast<std::size_t>(j)]),
                                                     std::fabs(lo - mu_prefix[static_cast<std::size_t>(j)])));
    }
    return d;
}

SpreadDiagnostic birkhoff_spread(const HolonomySystem& system, int n_starts, std::int64_t iterations,
                                 int battery) {
    const PwAffine& m = system.map;
    return birkhoff_spread(system.transversal, system.measure,
                           [&m](double x) { return m.eval(x); }, n_starts, iterations, battery);
}

// ---------------------------------------------------------------------------
// Partitions

namespace {

void validate_masses(const std::vector<double>& masses) {
    if (masses.empty()) throw std::invalid_argument("masses empty");
    double sum = 0.0;
    for (double l : masses) {
        if (!(l > 0.0)) throw std::invalid_argument("masses must be positive");
        sum += l;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("masses do not sum to 1");
}

MassPartition finalize_partition(const CantorTransversal& tr, const std::vector<double>& weights,
                                 const std::vector<double>& masses, const std::vector<int>& cut_after,
                                 double total) {
    MassPartition out;
    out.refined = tr;
    int first = 0;
    for (std::size_t part = 0; part < masses.size(); ++part) {
        int last = cut_after[part];
        CantorTransversal piece;
        piece.depth = tr.depth;
        double acc = 0.0;
        for (int i = first; i <= last; ++i) {
            piece.bands.push_back(tr.bands[static_cast<std::size_t>(i)]);
            acc += weights[static_cast<std::size_t>(i)];
        }
        out.parts.push_back(std::move(piece));
        out.masses.push_back(acc);
        out.band_ranges.emplace_back(first, last);
        out.max_residual = std::max(out.max_residual, std::fabs(acc - masses[part] * total));
        first = last + 1;
    }
    return out;
}

}  // namespace

MassPartition partition_by_mass(const CantorTransversal& tr, const TransversalMeasure& mu,
                                const std::vector<double>& masses) {
    validate_masses(masses);
    const int nb = static_cast<int>(tr.bands.size());
    const int nparts = static_cast<int>(masses.size());
    if (nparts > nb) throw std::invalid_argument("more parts than bands");

    std::vector<int> cut_after(masses.size());
    double run = 0.0;     // cumulative weight through the previous cut
    double target = 0.0;  // cumulative requested mass
    int i = 0;
    for (int part = 0; part + 1 < nparts; ++part) {
        target += masses[static_cast<std::size_t>(part)] * mu.total;
        const int last_allowed = nb - 1 - (nparts - 1 - part);  // leave bands for later parts
        int last = i;                                           // at least one band per part
        run += mu.weights[static_cast<std::size_t>(i)];
        for (int j = i + 1; j <= last_allowed; ++j) {
            double with_next = run + mu.weights[static_cast<std::size_t>(j)];
            if (std::fabs(run - target) <= std::fabs(with_next - target)) break;
            run = with_next;
            last = j;
        }
        cut_after[static_cast<std::size_t>(part)] = last;
        i = last + 1;
    }
    cut_after[masses.size() - 1] = nb - 1;
    return finalize_partition(tr, mu.weights, masses, cut_after, mu.total);
}

MassPartition partition_by_mass_exact(const CantorTransversal& tr, const TransversalMeasure& mu,
                                      const std::vector<double>& masses) {
    validate_masses(masses);

    // split bands at exact measure quantiles, then cut between (sub-)bands
    std::vector<double> targets(masses.size());
    double acc = 0.0;
    for (std::size_t p = 0; p < masses.size(); ++p) {
        acc += masses[p] * mu.total;
        targets[p] = acc;
    }

    CantorTransversal refined;
    refined.depth = tr.depth;
    std::vector<double> weights;
    std::vector<int> cut_after(masses.size(), -1);
    double run = 0.0;
    std::size_t next_target = 0;
    for (std::size_t b = 0; b < tr.bands.size(); ++b) {
        Interval cur = tr.bands[b];
        double w = mu.weights[b];
        while (next_target + 1 < masses.size() && run + w > targets[next_target] + 1e-15) {
            double need = targets[next_target] - run;
            double split = mu.cumulative.inverse_at(mu.cumulative.at(cur.lo) + need);
            if (split > cur.lo + 1e-15 && split < cur.hi - 1e-15) {
                refined.bands.push_back({cur.lo, split});
                weights.push_back(need);
                cut_after[next_target] = static_cast<int>(refined.bands.size()) - 1;
                cur.lo = split;
                w -= need;
                run = targets[next_target];
            } else {
                // quantile sits at (or hugs) the band edge; cut there
                if (split <= cur.lo + 1e-15) {
                    cut_after[next_target] = static_cast<int>(refined.bands.size()) - 1;
                    run = targets[next_target];
                } else {
                    refined.bands.push_back(cur);
                    weights.push_back(w);
                    cut_after[next_target] = static_cast<int>(refined.bands.size()) - 1;
                    run = targets[next_target];
                    w = 0.0;
                }
            }
            ++next_target;
        }
        if (w > 0.0) {
            refined.bands.push_back(cur);
            weights.push_back(w);
            run += w;
        }
    }
    for (std::size_t p = 0; p < masses.size(); ++p)
        if (cut_after[p] < 0) cut_after[p] = static_cast<int>(refined.bands.size()) - 1;
    cut_after[masses.size() - 1] = static_cast<int>(refined.bands.size()) - 1;

    return finalize_partition(refined, weights, masses, cut_after, mu.total);
}

// ---------------------------------------------------------------------------
// Transport

TransportMap transport_map(const CantorTransversal& src_tr, const TransversalMeasure& src_mu,
                           const CantorTransversal& dst_tr, const TransversalMeasure& dst_mu) {
    if (std::fabs(src_mu.total - dst_mu.total) > 1e-9 * std::max(src_mu.total, dst_mu.total))
        throw std::invalid_argument("mass mismatch");
    (void)src_tr;
    (void)dst_tr;

    const Cumulative& cs = src_mu.cumulative;
    const Cumulative& ct = dst_mu.cumulative;

    // Match level sets: for every cumulative level, pair the leftmost and
    // rightmost preimages on both sides. Plateaus (gaps) on either side then
    // map onto each other affinely, and monotonicity is automatic.
    std::vector<double> levels;
    levels.reserve(cs.c.size() + ct.c.size());
    levels.insert(levels.end(), cs.c.begin(), cs.c.end());
    levels.insert(levels.end(), ct.c.begin(), ct.c.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::vector<std::pair<double, double>> ctrl;
    ctrl.reserve(2 * levels.size());
    for (double lv : levels) {
        ctrl.emplace_back(cs.inverse_at(lv), ct.inverse_at(lv));
        ctrl.emplace_back(cs.inverse_at_right(lv), ct.inverse_at_right(lv));
    }
    std::sort(ctrl.begin(), ctrl.end());
    ctrl.erase(std::unique(ctrl.begin(), ctrl.end()), ctrl.end());

    TransportMap m;
    m.s.reserve(ctrl.size() + 1);
    m.t.reserve(ctrl.size() + 1);
    double prev_t = -1e300;
    for (auto& [sp, tp] : ctrl) {
        if (tp + 1e-12 < prev_t) throw std::runtime_error("transport control points not monotone");
        m.s.push_back(sp);
        m.t.push_back(std::max(tp, prev_t));
        prev_t = m.t.back();
    }
    // close the period
    if (m.s.back() != m.s.front() + 1.0) {
        m.s.push_back(m.s.front() + 1.0);
        m.t.push_back(m.t.front() + 1.0);
    } else {
        m.t.back() = m.t.front() + 1.0;
    }
    return m;
}

ComposedMap compose_holonomy(const PwAffine& h1, const PwAffine& h2, const TransportMap& phi) {
    return ComposedMap([h1](double x) { return h1.eval(x); }, [h2](double x) { return h2.eval(x); }, phi);
}

}  // namespace ergosol
