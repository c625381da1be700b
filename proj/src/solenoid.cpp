#include "ergosol/solenoid.hpp"

#include <algorithm>
#include <cmath>

#include "ergosol/parallel.hpp"

namespace ergosol {

// ---------------------------------------------------------------------------
// Cycle

Polyline Cycle::loop(const Vec& base) const {
    Polyline p;
    p.dim = dim;
    Vec end = base;
    end[static_cast<std::size_t>(axis)] += sign;
    p.pts = {base, end};
    return p;
}

// ---------------------------------------------------------------------------
// SuspensionSolenoid geometry

int SuspensionSolenoid::chunk_of(double y) const {
    if (chunk_starts.size() <= 1) return 0;
    double x = frac(y);
    // cyclic: chunk i covers [chunk_starts[i], chunk_starts[i+1])
    auto it = std::upper_bound(chunk_starts.begin(), chunk_starts.end(), x);
    if (it == chunk_starts.begin() || it == chunk_starts.end())
        return static_cast<int>(chunk_starts.size()) - 1;
    return static_cast<int>(it - chunk_starts.begin()) - 1;
}

Vec SuspensionSolenoid::transversal_point(double y) const {
    double h = core.arc_base + core.arc_scale * frac(y);
    if (dim == 2) return vec2(core.x_in, h);
    return vec3(core.x_in, core.plane, h);
}

Polyline SuspensionSolenoid::leaf_piece(double y) const {
    const double yy = frac(y);
    Polyline p;
    p.dim = dim;

    if (kind == Kind::linear_flow) {
        // leaf of the constant-slope flow: one full period
        double rho = holonomy.map.displacement(yy);
        p.pts = {vec2(0.0, yy), vec2(1.0, yy + rho)};
        return p;
    }

    const double H = holonomy.map.eval(yy);
    const std::size_t height_axis = static_cast<std::size_t>(dim - 1);
    const double eta = core.arc_base + core.arc_scale * H;
    const Cycle& cyc = cycles[static_cast<std::size_t>(chunk_of(yy))];

    Vec start = transversal_point(yy);
    Vec out = start;
    out[0] = core.x_out;
    out[height_axis] = eta;
    p.pts.push_back(start);
    p.pts.push_back(out);  // core crossing: isotopy track, a straight segment

    if (cyc.axis == 0) {
        Vec end = out;
        end[0] = core.x_in + cyc.sign;
        p.pts.push_back(end);
    } else {
        Vec lane_in = out;
        lane_in[0] = core.lane;
        Vec lane_out = lane_in;
        lane_out[static_cast<std::size_t>(cyc.axis)] += cyc.sign;
        Vec end = lane_out;
        end[0] = core.x_in;
        p.pts.push_back(lane_in);
        p.pts.push_back(lane_out);
        p.pts.push_back(end);
    }
    return p;
}

double SuspensionSolenoid::piece_measure(const Polyline& piece) const {
    if (kind == Kind::linear_flow) return 1.0;  // flow time of one period
    return piece.length();
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

SupportBox core_region(const CoreModel& c, int dim) {
    double lo_h = c.arc_base - c.arc_scale;
    double hi_h = c.arc_base + 2.0 * c.arc_scale;
    if (dim == 2) return SupportBox::box(vec2(c.x_in - 0.01, lo_h), vec2(c.x_out + 0.01, hi_h));
    return SupportBox::box(vec3(c.x_in - 0.01, c.plane - 0.05, lo_h),
                           vec3(c.x_out + 0.01, c.plane + 0.05, hi_h));
}

double solenoid_mass(const SuspensionSolenoid& s) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.holonomy.transversal.bands.size(); ++i) {
        Polyline piece = s.leaf_piece(s.holonomy.transversal.bands[i].midpoint());
        m += s.holonomy.measure.weights[i] * s.piece_measure(piece);
    }
    return m;
}

}  // namespace

SuspensionSolenoid realize_class(const std::vector<double>& klass, const RealizeConfig& cfg) {
    double l1 = 0.0;
    for (double a : klass) l1 += std::fabs(a);
    if (!(l1 > 0.0)) throw std::invalid_argument("null class");
    const int dim = static_cast<int>(klass.size());
    if (dim != 2 && dim != 3) throw std::invalid_argument("class dimension must be 2 or 3");

    // positive coefficients after orientation flips; drop vanishing cycles
    std::vector<Cycle> cycles;
    std::vector<double> masses;
    for (int i = 0; i < dim; ++i) {
        double a = klass[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        cycles.push_back(Cycle{dim, i, a > 0.0 ? +1 : -1});
        masses.push_back(std::fabs(a) / l1);
    }

    auto rho = make_rotation_number(cfg.rho, cfg.cf_depth);
    auto sched = inverse_quadratic_schedule(cfg.depth + 1, cfg.schedule_total);
    DenjoyMap dm = build_denjoy(rho, sched, cfg.depth);
    CantorTransversal tr = transversal_at_depth(dm, cfg.depth);
    TransversalMeasure mu = invariant_measure(dm, cfg.depth);

    MassPartition part = partition_by_mass_exact(tr, mu, masses);

    SuspensionSolenoid s;
    s.dim = dim;
    s.kind = SuspensionSolenoid::Kind::denjoy_suspension;
    s.denjoy = dm;
    s.holonomy.transversal = part.refined;
    s.holonomy.map = dm.map;
    s.holonomy.measure = mu;
    s.holonomy.measure.weights.clear();
    for (const Interval& b : part.refined.bands) s.holonomy.measure.weights.push_back(mu.mass(b));
    s.cycles = cycles;
    for (const auto& [first, last] : part.band_ranges) {
        (void)last;
        s.chunk_starts.push_back(part.refined.bands[static_cast<std::size_t>(first)].lo);
    }
    s.core.arc_scale = cfg.arc_scale;
    s.core.region = core_region(s.core, dim);

    s.mass = solenoid_mass(s);
    s.normalized = true;
    s.scale = l1 * s.mass;
    return s;
}

SuspensionSolenoid rotation_suspension(double rho, int bands) {
    SuspensionSolenoid s;
    s.dim = 2;
    s.kind = SuspensionSolenoid::Kind::linear_flow;
    s.holonomy = uniform_rotation_system(rho, bands);
    s.cycles = {Cycle{2, 0, +1}};
    s.chunk_starts = {0.0};
    s.core.x_in = 0.0;
    s.core.x_out = 1.0;
    s.core.arc_base = 0.0;
    s.core.arc_scale = 1.0;
    s.core.region = SupportBox::everywhere();
    s.mass = 0.0;
    for (double w : s.holonomy.measure.weights) s.mass += w;  // flow time is one per band
    s.normalized = true;
    s.scale = s.mass;
    return s;
}

SuspensionSolenoid reversed(SuspensionSolenoid s) {
    s.orientation = -s.orientation;
    return s;
}

// ---------------------------------------------------------------------------
// Pairing

namespace {

struct BandSet {
    std::vector<Interval> bands;
    std::vector<double> weights;
};

BandSet band_set(const SuspensionSolenoid& s, int transversal_depth) {
    if (transversal_depth < 0 || !s.denjoy) {
        return {s.holonomy.transversal.bands, s.holonomy.measure.weights};
    }
    CantorTransversal tr = transversal_at_depth(*s.denjoy, transversal_depth);
    BandSet out;
    out.bands = tr.bands;
    for (const Interval& b : tr.bands) out.weights.push_back(s.holonomy.measure.mass(b));
    return out;
}

void append_polyline_nodes(kernels::QuadNodes& nodes, const Polyline& piece, double weight, int dim,
                           int nodes_per_unit) {
    const int nseg = piece.segment_count();
    for (int i = 0; i < nseg; ++i) {
        const Vec& a = piece.pts[static_cast<std::size_t>(i)];
        const Vec& b = (i + 1 < static_cast<int>(piece.pts.size())) ? piece.pts[static_cast<std::size_t>(i + 1)]
                                                                    : piece.pts.front();
        Vec d = b - a;
        double len = norm(d);
        if (len == 0.0) continue;
        int m = std::max(2, static_cast<int>(std::ceil(len * nodes_per_unit)));
        double h = 1.0 / m;
        for (int j = 0; j <= m; ++j) {
            double tw = ((j == 0 || j == m) ? 0.5 : 1.0) * h * weight;
            Vec p = a + (j * h) * d;
            for (int c = 0; c < dim; ++c) p[static_cast<std::size_t>(c)] = frac(p[static_cast<std::size_t>(c)]);
            nodes.push(p, tw * d);
        }
    }
}

void require_normalized(const SuspensionSolenoid& s) {
    if (!s.normalized) throw std::invalid_argument("normalize first");
}

}  // namespace

kernels::QuadNodes pairing_nodes(const SuspensionSolenoid& s, int transversal_depth,
                                 int nodes_per_unit) {
    require_normalized(s);
    BandSet bs = band_set(s, transversal_depth);
    kernels::QuadNodes nodes;
    for (std::size_t i = 0; i < bs.bands.size(); ++i) {
        Polyline piece = s.leaf_piece(bs.bands[i].midpoint());
        double w = s.orientation * bs.weights[i] / s.mass;
        append_polyline_nodes(nodes, piece, w, s.dim, nodes_per_unit);
    }
    return nodes;
}

double rs_pair(const SuspensionSolenoid& s, const KForm& form, int transversal_depth,
               int nodes_per_unit) {
    kernels::QuadNodes nodes = pairing_nodes(s, transversal_depth, nodes_per_unit);
    Compiled1Form cf = compile_one_form(form);
    return kernels::pair_nodes(nodes, [&](const Vec& p, const Vec& t) { return cf.pair(p, t); });
}

CurrentVector rs_current(const SuspensionSolenoid& s, const Dictionary& dict, int transversal_depth,
                         int nodes_per_unit) {
    kernels::QuadNodes nodes = pairing_nodes(s, transversal_depth, nodes_per_unit);
    std::vector<Compiled1Form> compiled;
    compiled.reserve(dict.entries.size());
    for (const auto& e : dict.entries) compiled.push_back(compile_one_form(e.form));

    CurrentVector v;
    v.dict_id = dict.id;
    v.pairings = kernels::pair_batch(nodes, dict.size(), [&](int k, const Vec& p, const Vec& t) {
        return compiled[static_cast<std::size_t>(k)].pair(p, t);
    });
    // leaf measure per unit transversal mass; one after normalization
    BandSet bs = band_set(s, transversal_depth);
    double m = 0.0;
    for (std::size_t i = 0; i < bs.bands.size(); ++i)
        m += bs.weights[i] * s.piece_measure(s.leaf_piece(bs.bands[i].midpoint()));
    v.mass_estimate = m / s.mass;
    return v;
}

std::vector<double> homology_class(const SuspensionSolenoid& s, int transversal_depth) {
    require_normalized(s);
    BandSet bs = band_set(s, transversal_depth);
    std::vector<double> h(static_cast<std::size_t>(s.dim), 0.0);
    for (std::size_t i = 0; i < bs.bands.size(); ++i) {
        Polyline piece = s.leaf_piece(bs.bands[i].midpoint());
        Vec disp = piece.pts.back() - piece.pts.front();
        double w = s.orientation * bs.weights[i] / s.mass;
        for (int c = 0; c < s.dim; ++c)
            h[static_cast<std::size_t>(c)] += w * disp[static_cast<std::size_t>(c)];
    }
    return h;
}

// ---------------------------------------------------------------------------
// Leaves

LeafSegment leaf_segment(const SuspensionSolenoid& s, double y0, long long returns) {
    require_normalized(s);
    if (returns < 1) throw std::invalid_argument("need at least one return");
    if (band_index(s.holonomy.transversal, y0) < 0)
        throw std::invalid_argument("point not on transversal");

    LeafSegment seg;
    seg.returns = returns;
    seg.curve.dim = s.dim;
    double y = frac(y0);
    for (long long r = 0; r < returns; ++r) {
        Polyline piece = s.leaf_piece(y);
        if (r == 0) {
            seg.curve.pts = piece.pts;
        } else {
            // lift continuation: align the piece start with the current end
            Vec shift = seg.curve.pts.back() - piece.pts.front();
            for (std::size_t i = 1; i < piece.pts.size(); ++i)
                seg.curve.pts.push_back(piece.pts[i] + shift);
        }
        seg.length += piece.length();
        y = s.holonomy.map.eval(y);
    }
    seg.end_point = y;

    Vec end = seg.curve.pts.back();
    Vec start = seg.curve.pts.front();
    Vec delta = torus_delta(end, start, s.dim);
    seg.cap.dim = s.dim;
    seg.cap.pts = {end, end + delta};
    seg.cap_length = norm(delta);
    seg.cap_ratio = seg.cap_length / seg.length;
    return seg;
}

std::vector<LeafLimitRow> leaf_limit_experiment(const SuspensionSolenoid& s, double y0,
                                                const std::vector<long long>& schedule,
                                                const Dictionary& dict, int nodes_per_unit) {
    require_normalized(s);
    if (band_index(s.holonomy.transversal, y0) < 0)
        throw std::invalid_argument("point not on transversal");
    CurrentVector reference = rs_current(s, dict, -1, nodes_per_unit);

    std::vector<long long> sched = schedule;
    std::sort(sched.begin(), sched.end());

    std::vector<Compiled1Form> compiled;
    compiled.reserve(dict.entries.size());
    for (const auto& e : dict.entries) compiled.push_back(compile_one_form(e.form));

    std::vector<LeafLimitRow> rows;
    std::vector<double> sums(static_cast<std::size_t>(dict.size()), 0.0);
    double length = 0.0;
    double y = frac(y0);
    Vec start_pos = s.transversal_point(y);
    Vec end_pos = start_pos;
    std::size_t next = 0;
    for (long long r = 1; next < sched.size(); ++r) {
        Polyline piece = s.leaf_piece(y);
        kernels::QuadNodes nodes;
        append_polyline_nodes(nodes, piece, static_cast<double>(s.orientation), s.dim, nodes_per_unit);
        std::vector<double> p =
            kernels::pair_batch(nodes, dict.size(), [&](int k, const Vec& pt, const Vec& t) {
                return compiled[static_cast<std::size_t>(k)].pair(pt, t);
            });
        for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += p[i];
        length += piece.length();
        end_pos = piece.pts.back();
        y = s.holonomy.map.eval(y);

        if (r == sched[next]) {
            CurrentVector leaf;
            leaf.dict_id = dict.id;
            leaf.pairings.resize(sums.size());
            for (std::size_t i = 0; i < sums.size(); ++i) leaf.pairings[i] = sums[i] / length;
            leaf.mass_estimate = 1.0;  // normalized by its own length

            LeafLimitRow row;
            row.returns = r;
            row.leaf_length = length;
            row.cap_ratio = torus_dist(end_pos, start_pos, s.dim) / length;
            row.weak_dist = weak_distance(leaf, reference);
            row.mass_estimate = leaf.mass_estimate;
            rows.push_back(row);
            ++next;
        }
    }
    return rows;
}

}  // namespace ergosol
