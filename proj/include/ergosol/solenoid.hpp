#pragma once

#include <optional>
#include <vector>

#include "ergosol/circle.hpp"
#include "ergosol/forms.hpp"
#include "ergosol/kernels.hpp"

namespace ergosol {

/// Oriented coordinate loop of the torus.
struct Cycle {
    int dim = 2;
    int axis = 0;
    int sign = +1;

    std::array<int, 3> homology() const {
        std::array<int, 3> h{0, 0, 0};
        h[static_cast<std::size_t>(axis)] = sign;
        return h;
    }
    Polyline loop(const Vec& base) const;
};

/// Geometry of the central ball: leaves enter on the in-arc, cross to the
/// out-arc along the isotopy track (linear interpolation of lifts between the
/// identity and the holonomy), and detour through coordinate loops outside.
struct CoreModel {
    double x_in = 0.45;
    double x_out = 0.55;
    double lane = 0.75;       // detour lane for loops transverse to axis 0
    double plane = 0.35;      // fixed middle coordinate on T^3
    double arc_base = 0.30;   // transversal arc start on the last axis
    double arc_scale = 0.01;  // transversal arc height
    SupportBox region;
};

/// Measured 1-solenoid as a suspension over a Cantor holonomy system with an
/// explicit leafwise immersion into T^n.
struct SuspensionSolenoid {
    enum class Kind { denjoy_suspension, linear_flow };

    int dim = 2;
    Kind kind = Kind::denjoy_suspension;
    std::optional<DenjoyMap> denjoy;
    HolonomySystem holonomy;  // transversal (possibly quantile-refined), measure, return map
    std::vector<Cycle> cycles;
    std::vector<double> chunk_starts;  // cyclic cut positions, one per cycle
    CoreModel core;
    double mass = 0.0;  // leaf measure x transversal measure before normalization
    bool normalized = false;
    int orientation = +1;
    double scale = 1.0;  // realize_class reports its class as a / scale

    int chunk_of(double y) const;
    Vec transversal_point(double y) const;
    /// One-return leaf piece through the transversal point y (lift coords).
    Polyline leaf_piece(double y) const;
    /// Flow-time measure for the linear flow, arc length for suspensions.
    double piece_measure(const Polyline& piece) const;
};

struct RealizeConfig {
    double rho = 0.6180339887498949;  // golden mean
    int cf_depth = 40;
    int depth = 64;
    double schedule_total = 0.5;
    double arc_scale = 0.002;
    int dim = 2;
};

/// Uniquely ergodic suspension representing a positive multiple of the class:
/// coordinate cycles with orientations flipped to make all coefficients
/// positive, a Denjoy holonomy, and the Cantor transversal split at exact
/// measure quantiles. Throws std::invalid_argument("null class") on a = 0.
SuspensionSolenoid realize_class(const std::vector<double>& klass, const RealizeConfig& cfg = {});

/// Suspension of the rigid rotation embedded as t -> (t, y + rho t); its leaf
/// measure is the flow time, so the current pairs to (1, rho) on (dx, dy).
SuspensionSolenoid rotation_suspension(double rho, int bands = 256);

SuspensionSolenoid reversed(SuspensionSolenoid s);

/// Ruelle-Sullivan pairing: sum over bands of weight x leaf-piece line
/// integral through the band midpoint. Throws
/// std::invalid_argument("normalize first") on an unnormalized solenoid.
double rs_pair(const SuspensionSolenoid& s, const KForm& form, int transversal_depth = -1,
               int nodes_per_unit = 4096);

CurrentVector rs_current(const SuspensionSolenoid& s, const Dictionary& dict,
                         int transversal_depth = -1, int nodes_per_unit = 4096);

std::vector<double> homology_class(const SuspensionSolenoid& s, int transversal_depth = -1);

/// Shared quadrature nodes for a whole pairing batch.
kernels::QuadNodes pairing_nodes(const SuspensionSolenoid& s, int transversal_depth = -1,
                                 int nodes_per_unit = 4096);

struct LeafSegment {
    Polyline curve;  // lift polyline of the concatenated pieces
    double length = 0.0;
    Polyline cap;  // shortest geodesic closing the endpoints
    double cap_length = 0.0;
    double cap_ratio = 0.0;
    double end_point = 0.0;  // h^R(y0)
    long long returns = 0;
};

/// Throws std::invalid_argument("point not on transversal") when y0 is in a gap.
LeafSegment leaf_segment(const SuspensionSolenoid& s, double y0, long long returns);

struct LeafLimitRow {
    long long returns = 0;
    double leaf_length = 0.0;
    double cap_ratio = 0.0;
    double weak_dist = 0.0;
    double mass_estimate = 0.0;
};

/// Normalized long-leaf currents against the solenoid current, one row per
/// scheduled return count.
std::vector<LeafLimitRow> leaf_limit_experiment(const SuspensionSolenoid& s, double y0,
                                                const std::vector<long long>& schedule,
                                                const Dictionary& dict, int nodes_per_unit = 4096);

}  // namespace ergosol
