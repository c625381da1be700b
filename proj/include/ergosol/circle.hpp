#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ergosol/common.hpp"

namespace ergosol {

/// Monotone piecewise-affine degree-1 circle map. Breakpoints xs live in
/// [0, 1); ys is the lift at those points (non-decreasing, winding one).
/// Evaluation at a stored breakpoint returns the stored image bit-exactly,
/// which is what makes the semiconjugacy and measure identities hold at
/// machine precision on the gap skeleton.
class PwAffine {
  public:
    PwAffine() = default;

    /// Build from circle-valued samples; unwraps to a lift. Values may
    /// repeat (plateaus); decreasing values mean a wrap.
    static PwAffine from_circle_values(std::vector<double> xs, const std::vector<double>& y_circle);
    static PwAffine identity();
    static PwAffine rotation(double rho);

    double eval(double t) const;          // circle -> circle
    double operator()(double t) const { return eval(t); }
    double lift_at(double t) const;       // t in [0,1) -> lift value
    double displacement(double t) const;  // frac(eval(t) - t)

    /// Requires a strictly increasing map.
    PwAffine inverse() const;

    bool strictly_increasing() const;
    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& lift_values() const { return ys_; }

  private:
    std::vector<double> xs_;  // sorted, in [0,1)
    std::vector<double> ys_;  // lift values, non-decreasing, ys.back() <= ys[0] + 1
};

/// Non-decreasing piecewise-affine function over a cut interval
/// [x.front(), x.back()]; used for cumulative measures.
struct Cumulative {
    std::vector<double> x;  // increasing (ties allowed for jumps: none here)
    std::vector<double> c;  // non-decreasing, c.front() == 0

    double total() const { return c.empty() ? 0.0 : c.back(); }
    double at(double pos) const;          // pos interpreted on the circle, folded into the cut
    double inverse_at(double level) const;        // leftmost preimage
    double inverse_at_right(double level) const;  // rightmost preimage
};

/// Order-preserving transversal-to-transversal map from cumulative-measure
/// matching. Control points may repeat on either side (plateaus over source
/// gaps, jumps across target gaps); evaluation is affine in between.
struct TransportMap {
    std::vector<double> s;  // source points, non-decreasing, s.back() == s.front() + 1
    std::vector<double> t;  // target points, non-decreasing, t.back() == t.front() + 1

    double eval(double x) const;
    double eval_inverse(double y) const;
    static TransportMap identity();
};

struct RotationNumber {
    double value = 0.0;
    int cf_depth = 40;
    std::vector<std::pair<std::int64_t, std::int64_t>> convergents;  // p/q
};

/// Continued-fraction screen: throws std::invalid_argument("rational
/// rotation number") when the expansion of `value` terminates within
/// `cf_depth` partial quotients.
RotationNumber make_rotation_number(double value, int cf_depth = 40);

struct GapSchedule {
    int range = 0;                 // lengths defined for |n| <= range
    std::vector<double> lengths;   // index n + range
    double total = 0.0;

    double length(int n) const { return lengths[static_cast<std::size_t>(n + range)]; }
    /// l_{n+1}/l_n increases to 1 in |n|.
    bool ratio_condition_ok() const;
};

/// l_n proportional to 1/(n^2+4), normalized to the given total.
GapSchedule inverse_quadratic_schedule(int range, double total = 0.5);

/// Denjoy counterexample at finite depth N: gaps I_n inserted at the orbit
/// points {n rho} for |n| <= N, plus two short non-gap plateau intervals at
/// the window edges (orbit points +-(N+1)) that receive the image of I_N and
/// feed the preimage of I_{-N}. With those, pi compose h equals the rotation
/// exactly at every gap endpoint and the invariant measure is exact on the
/// band algebra, while h stays a strictly increasing homeomorphism.
struct DenjoyMap {
    RotationNumber rho;
    GapSchedule schedule;
    int depth = 0;
    PwAffine map;             // h
    PwAffine semiconjugacy;   // pi (plateaus over gaps and edge plateaus)
    std::vector<Interval> gaps;  // index n + depth
    Interval edge_plateau_lo, edge_plateau_hi;

    const Interval& gap(int n) const { return gaps[static_cast<std::size_t>(n + depth)]; }
    double orbit_point(int n) const { return frac(n * rho.value); }
};

DenjoyMap build_denjoy(const RotationNumber& rho, const GapSchedule& schedule, int depth);

struct CantorTransversal {
    int depth = 0;
    std::vector<Interval> bands;  // cyclic order, disjoint, first band follows gap I_0
};

struct TransversalMeasure {
    std::vector<double> weights;  // one per band
    double total = 0.0;
    Cumulative cumulative;        // cut at the first band's left endpoint

    double mass(const Interval& iv) const;
};

struct HolonomySystem {
    CantorTransversal transversal;
    TransversalMeasure measure;
    PwAffine map;
};

/// Bands of the circle minus the 2*depth+1 gaps; depth <= map depth.
CantorTransversal transversal_at_depth(const DenjoyMap& dm, int depth);

/// Pushforward of Lebesgue through the semiconjugacy: weight(band) equals
/// the length of pi(band).
TransversalMeasure invariant_measure(const DenjoyMap& dm, int depth);

/// Uniform transversal for rigid-rotation suspensions: `bands` equal closed
/// arcs separated by micro-gaps, Lebesgue weights.
HolonomySystem uniform_rotation_system(double rho, int bands);

HolonomySystem denjoy_system(const DenjoyMap& dm, int depth);

/// Index of the band containing p, -1 if p falls in a gap.
int band_index(const CantorTransversal& tr, double p);

/// (lift^N(x) - x)/N at x = 0.
template <class Map>
double rotation_number_estimate(const Map& map, std::int64_t iterations) {
    double x = 0.0;
    double disp = 0.0;
    for (std::int64_t i = 0; i < iterations; ++i) {
        double y = map(x);
        disp += frac(y - x);
        x = y;
    }
    return disp / static_cast<double>(iterations);
}

/// Throws std::invalid_argument("point not on transversal") if the start
/// lies in a gap.
double birkhoff_average(const HolonomySystem& system, const std::function<double(double)>& observable,
                        double start, std::int64_t iterations);

struct SpreadDiagnostic {
    int n_starts = 0;
    std::int64_t iterations = 0;
    double max_spread = 0.0;  // max over battery of (max - min over starts)
    double max_error = 0.0;   // max over battery and starts of |average - mu|
    std::vector<double> spreads;
};

/// Unique-ergodicity diagnostic: Birkhoff averages of a battery of
/// band-prefix indicators over measure-quantile start points.
SpreadDiagnostic birkhoff_spread(const CantorTransversal& tr, const TransversalMeasure& mu,
                                 const std::function<double(double)>& map, int n_starts,
                                 std::int64_t iterations, int battery = 10);
SpreadDiagnostic birkhoff_spread(const HolonomySystem& system, int n_starts, std::int64_t iterations,
                                 int battery = 10);

struct MassPartition {
    std::vector<CantorTransversal> parts;
    std::vector<double> masses;     // achieved
    double max_residual = 0.0;      // max |achieved - requested|
    CantorTransversal refined;      // transversal actually partitioned
    std::vector<std::pair<int, int>> band_ranges;  // [first, last] band of each part in `refined`
};

/// Greedy cyclic accumulation of whole bands; residual bounded by the
/// largest band weight and reported.
MassPartition partition_by_mass(const CantorTransversal& tr, const TransversalMeasure& mu,
                                const std::vector<double>& masses);

/// Same interface, but the band crossing each boundary is split at the
/// exact measure quantile, so achieved masses match to roundoff.
MassPartition partition_by_mass_exact(const CantorTransversal& tr, const TransversalMeasure& mu,
                                      const std::vector<double>& masses);

/// Cumulative-matching transport; throws std::invalid_argument("mass
/// mismatch") when totals differ.
TransportMap transport_map(const CantorTransversal& src_tr, const TransversalMeasure& src_mu,
                           const CantorTransversal& dst_tr, const TransversalMeasure& dst_mu);

/// phi^{-1} o h2 o phi o h1 as an evaluable circle map.
class ComposedMap {
  public:
    ComposedMap(std::function<double(double)> h1, std::function<double(double)> h2, TransportMap phi)
        : h1_(std::move(h1)), h2_(std::move(h2)), phi_(std::move(phi)) {}
    double operator()(double y) const { return phi_.eval_inverse(h2_(phi_.eval(h1_(y)))); }

  private:
    std::function<double(double)> h1_, h2_;
    TransportMap phi_;
};

ComposedMap compose_holonomy(const PwAffine& h1, const PwAffine& h2, const TransportMap& phi);

}  // namespace ergosol
