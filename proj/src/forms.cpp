#include "ergosol/forms.hpp"

#include <algorithm>
#include <cmath>

#include "ergosol/kernels.hpp"
#include "ergosol/parallel.hpp"

namespace ergosol {

// ---------------------------------------------------------------------------
// TrigPoly

namespace {

// canonical key: first nonzero component of k positive; sin picks up a sign
void canonical_term(TrigTerm& t) {
    int lead = 0;
    for (int i = 0; i < 3; ++i) {
        if (t.k[i] != 0) {
            lead = t.k[i];
            break;
        }
    }
    if (lead < 0) {
        for (auto& ki : t.k) ki = -ki;
        if (t.is_sin) t.coeff = -t.coeff;
    }
    if (t.k == std::array<int, 3>{0, 0, 0} && t.is_sin) t.coeff = 0.0;  // sin(0) == 0
}

bool term_key_less(const TrigTerm& a, const TrigTerm& b) {
    if (a.k != b.k) return a.k < b.k;
    return a.is_sin < b.is_sin;
}

}  // namespace

TrigPoly::TrigPoly(int dim, std::vector<TrigTerm> terms) : dim_(dim), terms_(std::move(terms)) {
    canonicalize();
}

void TrigPoly::canonicalize() {
    for (auto& t : terms_) canonical_term(t);
    std::sort(terms_.begin(), terms_.end(), term_key_less);
    std::vector<TrigTerm> merged;
    for (const auto& t : terms_) {
        if (!merged.empty() && merged.back().k == t.k && merged.back().is_sin == t.is_sin)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const TrigTerm& t) { return t.coeff == 0.0; }),
                 merged.end());
    terms_ = std::move(merged);
}

TrigPoly TrigPoly::constant(int dim, double c) {
    return TrigPoly(dim, {TrigTerm{false, {0, 0, 0}, c}});
}

TrigPoly TrigPoly::monomial(int dim, const std::array<int, 3>& k, bool is_sin, double coeff) {
    return TrigPoly(dim, {TrigTerm{is_sin, k, coeff}});
}

double TrigPoly::eval(const Vec& p) const {
    double s = 0.0;
    for (const auto& t : terms_) {
        double phase = kTwoPi * (t.k[0] * p[0] + t.k[1] * p[1] + t.k[2] * p[2]);
        s += t.coeff * (t.is_sin ? std::sin(phase) : std::cos(phase));
    }
    return s;
}

Vec TrigPoly::gradient(const Vec& p) const {
    Vec g{0, 0, 0};
    for (const auto& t : terms_) {
        double phase = kTwoPi * (t.k[0] * p[0] + t.k[1] * p[1] + t.k[2] * p[2]);
        double d = t.coeff * kTwoPi * (t.is_sin ? std::cos(phase) : -std::sin(phase));
        for (int i = 0; i < dim_; ++i) g[i] += d * t.k[i];
    }
    return g;
}

TrigPoly TrigPoly::partial(int axis) const {
    std::vector<TrigTerm> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (t.k[axis] == 0) continue;
        TrigTerm d;
        d.k = t.k;
        d.is_sin = !t.is_sin;
        double w = kTwoPi * t.k[axis];
        d.coeff = t.is_sin ? t.coeff * w : -(t.coeff * w);
        out.push_back(d);
    }
    return TrigPoly(dim_, std::move(out));
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
    std::vector<TrigTerm> all = terms_;
    all.insert(all.end(), o.terms_.begin(), o.terms_.end());
    return TrigPoly(std::max(dim_, o.dim_), std::move(all));
}

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
    // product-to-sum on every term pair
    std::vector<TrigTerm> out;
    out.reserve(terms_.size() * o.terms_.size() * 2);
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) {
            std::array<int, 3> kp, km;
            for (int i = 0; i < 3; ++i) {
                kp[i] = a.k[i] + b.k[i];
                km[i] = a.k[i] - b.k[i];
            }
            double half = 0.5 * a.coeff * b.coeff;
            if (!a.is_sin && !b.is_sin) {        // cos cos
                out.push_back({false, km, half});
                out.push_back({false, kp, half});
            } else if (a.is_sin && b.is_sin) {   // sin sin
                out.push_back({false, km, half});
                out.push_back({false, kp, -half});
            } else if (a.is_sin && !b.is_sin) {  // sin cos
                out.push_back({true, kp, half});
                out.push_back({true, km, half});
            } else {                             // cos sin
                out.push_back({true, kp, half});
                out.push_back({true, km, -half});
            }
        }
    }
    return TrigPoly(std::max(dim_, o.dim_), std::move(out));
}

TrigPoly TrigPoly::scaled(double s) const {
    std::vector<TrigTerm> out = terms_;
    for (auto& t : out) t.coeff *= s;
    return TrigPoly(dim_, std::move(out));
}

int TrigPoly::degree() const {
    int d = 0;
    for (const auto& t : terms_)
        for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(t.k[i]));
    return d;
}

double TrigPoly::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::fabs(t.coeff));
    return m;
}

double TrigPoly::coeff_l1() const {
    double m = 0.0;
    for (const auto& t : terms_) m += std::fabs(t.coeff);
    return m;
}

// ---------------------------------------------------------------------------
// SmoothFunction

SmoothFunction::SmoothFunction() : dim_(2), trig_(TrigPoly::constant(2, 0.0)) {}

SmoothFunction SmoothFunction::zero(int dim) { return trig(TrigPoly::constant(dim, 0.0)); }

SmoothFunction SmoothFunction::trig(TrigPoly p) {
    SmoothFunction f;
    f.dim_ = p.dim();
    f.trig_ = std::move(p);
    f.support_ = SupportBox::everywhere();
    return f;
}

SmoothFunction SmoothFunction::generic(int dim, ValueFn value, GradFn grad, SupportBox support) {
    SmoothFunction f;
    f.dim_ = dim;
    f.trig_.reset();
    f.value_ = std::move(value);
    f.grad_ = std::move(grad);
    f.support_ = support;
    return f;
}

double SmoothFunction::value(const Vec& p) const { return trig_ ? trig_->eval(p) : value_(p); }

Vec SmoothFunction::gradient(const Vec& p) const { return trig_ ? trig_->gradient(p) : grad_(p); }

SmoothFunction SmoothFunction::scaled(double s) const {
    if (trig_) return trig(trig_->scaled(s));
    auto v = value_;
    auto g = grad_;
    return generic(dim_, [v, s](const Vec& p) { return s * v(p); },
                   [g, s](const Vec& p) { return s * g(p); }, support_);
}

SmoothFunction operator*(const SmoothFunction& a, const SmoothFunction& b) {
    if (a.has_trig() && b.has_trig()) return SmoothFunction::trig(a.trig_poly() * b.trig_poly());
    SupportBox sup = SupportBox::everywhere();
    if (!a.support().global) sup = a.support();
    if (!b.support().global) {
        if (sup.global) {
            sup = b.support();
        } else {
            for (int i = 0; i < 3; ++i) {
                sup.lo[i] = std::max(sup.lo[i], b.support().lo[i]);
                sup.hi[i] = std::min(sup.hi[i], b.support().hi[i]);
            }
        }
    }
    return SmoothFunction::generic(
        std::max(a.dim(), b.dim()),
        [a, b](const Vec& p) { return a.value(p) * b.value(p); },
        [a, b](const Vec& p) {
            double va = a.value(p), vb = b.value(p);
            return va * b.gradient(p) + vb * a.gradient(p);
        },
        sup);
}

SmoothFunction operator+(const SmoothFunction& a, const SmoothFunction& b) {
    if (a.has_trig() && b.has_trig()) return SmoothFunction::trig(a.trig_poly() + b.trig_poly());
    SupportBox sup = SupportBox::everywhere();
    return SmoothFunction::generic(
        std::max(a.dim(), b.dim()), [a, b](const Vec& p) { return a.value(p) + b.value(p); },
        [a, b](const Vec& p) { return a.gradient(p) + b.gradient(p); }, sup);
}

// ---------------------------------------------------------------------------
// Forms

int mask_degree(int mask) {
    int d = 0;
    while (mask) {
        d += mask & 1;
        mask >>= 1;
    }
    return d;
}

int wedge_sign(int mask_a, int mask_b) {
    if (mask_a & mask_b) return 0;
    int swaps = 0;
    for (int j = 0; j < 3; ++j) {
        if (!(mask_b & (1 << j))) continue;
        for (int i = j + 1; i < 3; ++i)
            if (mask_a & (1 << i)) ++swaps;
    }
    return (swaps % 2 == 0) ? 1 : -1;
}

std::string mask_label(int mask, int dim) {
    static const char* names[3] = {"dx", "dy", "dz"};
    std::string s;
    for (int i = 0; i < dim; ++i) {
        if (!(mask & (1 << i))) continue;
        if (!s.empty()) s += "^";
        s += names[i];
    }
    return s.empty() ? "1" : s;
}

KForm KForm::zero(int dim, int degree) {
    KForm f;
    f.dim = dim;
    f.degree = degree;
    return f;
}

KForm KForm::scalar(SmoothFunction f) {
    KForm w;
    w.dim = f.dim();
    w.degree = 0;
    w.comps.emplace_back(0, std::move(f));
    return w;
}

KForm KForm::basis(int dim, int mask) {
    KForm w;
    w.dim = dim;
    w.degree = mask_degree(mask);
    w.comps.emplace_back(mask, SmoothFunction::trig(TrigPoly::constant(dim, 1.0)));
    return w;
}

KForm KForm::one_form(int dim, std::vector<SmoothFunction> by_axis) {
    KForm w;
    w.dim = dim;
    w.degree = 1;
    for (int i = 0; i < dim; ++i) w.comps.emplace_back(1 << i, std::move(by_axis[static_cast<std::size_t>(i)]));
    return w;
}

const SmoothFunction* KForm::component(int mask) const {
    for (const auto& [m, f] : comps)
        if (m == mask) return &f;
    return nullptr;
}

KForm KForm::scaled(double s) const {
    KForm w;
    w.dim = dim;
    w.degree = degree;
    for (const auto& [m, f] : comps) w.comps.emplace_back(m, f.scaled(s));
    return w;
}

bool KForm::all_trig() const {
    for (const auto& [m, f] : comps)
        if (!f.has_trig()) return false;
    return true;
}

namespace {

void accumulate_component(std::vector<std::pair<int, SmoothFunction>>& comps, int mask,
                          const SmoothFunction& f) {
    for (auto& [m, g] : comps) {
        if (m == mask) {
            g = g + f;
            return;
        }
    }
    comps.emplace_back(mask, f);
}

}  // namespace

KForm exterior_derivative(const KForm& form) {
    if (form.degree >= form.dim) throw std::invalid_argument("top degree");
    KForm out = KForm::zero(form.dim, form.degree + 1);
    for (const auto& [mask, f] : form.comps) {
        for (int i = 0; i < form.dim; ++i) {
            int axis_mask = 1 << i;
            if (mask & axis_mask) continue;
            int sign = wedge_sign(axis_mask, mask);
            SmoothFunction df_i;
            if (f.has_trig()) {
                df_i = SmoothFunction::trig(f.trig_poly().partial(i));
            } else {
                df_i = SmoothFunction::generic(
                    form.dim, [f, i](const Vec& p) { return f.gradient(p)[i]; },
                    [f, i](const Vec& p) -> Vec {
                        // second derivatives are not tracked for generic fields
                        (void)p;
                        throw std::logic_error("gradient of derived generic component unavailable");
                    },
                    f.support());
            }
            accumulate_component(out.comps, axis_mask | mask, sign > 0 ? df_i : df_i.scaled(-1.0));
        }
    }
    std::sort(out.comps.begin(), out.comps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

KForm wedge(const KForm& a, const KForm& b) {
    if (a.degree + b.degree > a.dim) throw std::invalid_argument("degree overflow");
    KForm out = KForm::zero(std::max(a.dim, b.dim), a.degree + b.degree);
    for (const auto& [ma, fa] : a.comps) {
        for (const auto& [mb, fb] : b.comps) {
            int sign = wedge_sign(ma, mb);
            if (sign == 0) continue;
            SmoothFunction prod = fa * fb;
            accumulate_component(out.comps, ma | mb, sign > 0 ? prod : prod.scaled(-1.0));
        }
    }
    std::sort(out.comps.begin(), out.comps.end(),
              [](const auto& a_, const auto& b_) { return a_.first < b_.first; });
    return out;
}

double integrate_torus(const KForm& form, int resolution) {
    if (form.degree != form.dim) throw std::invalid_argument("not a top-degree form");
    if (resolution < 8) throw std::invalid_argument("resolution too small");
    const int top_mask = (1 << form.dim) - 1;
    const SmoothFunction* f = form.component(top_mask);
    if (!f) return 0.0;
    if (form.dim == 2)
        return kernels::grid_mean_2d(resolution,
                                     [&](double x, double y) { return f->value(vec2(x, y)); });
    return kernels::grid_mean_3d(
        resolution, [&](double x, double y, double z) { return f->value(vec3(x, y, z)); });
}

// ---------------------------------------------------------------------------
// Line integrals

double Polyline::length() const {
    double len = 0.0;
    for (int i = 0; i + 1 < static_cast<int>(pts.size()); ++i) len += norm(pts[static_cast<std::size_t>(i + 1)] - pts[static_cast<std::size_t>(i)]);
    if (closed && pts.size() > 1) len += norm(pts.front() - pts.back());
    return len;
}

int Polyline::segment_count() const {
    if (pts.size() < 2) return 0;
    return static_cast<int>(pts.size()) - 1 + (closed ? 1 : 0);
}

namespace {

Vec wrap_point(const Vec& p, int dim) {
    Vec q = p;
    for (int i = 0; i < dim; ++i) q[i] = frac(q[i]);
    return q;
}

double form_dot(const KForm& one_form, const Vec& p, const Vec& v) {
    double s = 0.0;
    for (const auto& [mask, f] : one_form.comps) {
        int axis = mask == 1 ? 0 : (mask == 2 ? 1 : 2);
        s += f.value(p) * v[axis];
    }
    return s;
}

}  // namespace

double line_integral(const Polyline& curve, const KForm& one_form, int nodes_per_unit) {
    if (one_form.degree != 1) throw std::invalid_argument("line integral needs a 1-form");
    double total = 0.0;
    const int nseg = curve.segment_count();
    for (int i = 0; i < nseg; ++i) {
        const Vec& a = curve.pts[static_cast<std::size_t>(i)];
        const Vec& b = (i + 1 < static_cast<int>(curve.pts.size())) ? curve.pts[static_cast<std::size_t>(i + 1)] : curve.pts.front();
        Vec d = b - a;
        double len = norm(d);
        if (len == 0.0) continue;
        int m = std::max(2, static_cast<int>(std::ceil(len * nodes_per_unit)));
        double h = 1.0 / m;
        double seg = 0.0;
        for (int j = 0; j <= m; ++j) {
            double w = (j == 0 || j == m) ? 0.5 : 1.0;
            Vec p = wrap_point(a + (j * h) * d, curve.dim);
            seg += w * form_dot(one_form, p, d);
        }
        total += seg * h;
    }
    return total;
}

double line_integral(const ParametricCurve& curve, const KForm& one_form, int nodes) {
    if (one_form.degree != 1) throw std::invalid_argument("line integral needs a 1-form");
    const int m = std::max(2, nodes);
    const double h = (curve.t1 - curve.t0) / m;
    double s = 0.0;
    for (int j = 0; j <= m; ++j) {
        double w = (j == 0 || j == m) ? 0.5 : 1.0;
        double t = curve.t0 + j * h;
        Vec p = wrap_point(curve.position(t), curve.dim);
        s += w * form_dot(one_form, p, curve.velocity(t));
    }
    return s * h;
}

// ---------------------------------------------------------------------------
// Bumps

namespace {

// C-infinity step: 0 for u <= 0, 1 for u >= 1
double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double p = std::exp(-1.0 / u);
    double q = std::exp(-1.0 / (1.0 - u));
    return p / (p + q);
}

double smooth_step_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double p = std::exp(-1.0 / u);
    double q = std::exp(-1.0 / (1.0 - u));
    double sum = p + q;
    return p * q * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / (sum * sum);
}

// 1D plateau on [lo, hi] with transition width m, unwrapped around `center`
double axis_bump(double x, double lo, double hi, double m, double center, double* deriv) {
    double t = center + (frac(x - center) <= 0.5 ? frac(x - center) : frac(x - center) - 1.0);
    if (deriv) *deriv = 0.0;
    if (t >= lo && t <= hi) return 1.0;
    if (t < lo) {
        double u = (t - (lo - m)) / m;
        if (deriv) *deriv = smooth_step_deriv(u) / m;
        return smooth_step(u);
    }
    double u = ((hi + m) - t) / m;
    if (deriv) *deriv = -smooth_step_deriv(u) / m;
    return smooth_step(u);
}

}  // namespace

SmoothFunction bump(int dim, const SupportBox& box, double margin) {
    if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
    for (int i = 0; i < dim; ++i)
        if (box.hi[i] - box.lo[i] + 2.0 * margin >= 1.0)
            throw std::invalid_argument("expanded box does not fit in a chart");

    Vec lo = box.lo, hi = box.hi;
    Vec center;
    for (int i = 0; i < 3; ++i) center[i] = 0.5 * (lo[i] + hi[i]);

    SupportBox grown = SupportBox::box(
        {lo[0] - margin, lo[1] - margin, lo[2] - margin},
        {hi[0] + margin, hi[1] + margin, hi[2] + margin});

    auto value = [dim, lo, hi, margin, center](const Vec& p) {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= axis_bump(p[i], lo[i], hi[i], margin, center[i], nullptr);
        return v;
    };
    auto grad = [dim, lo, hi, margin, center](const Vec& p) {
        std::array<double, 3> b{1, 1, 1}, db{0, 0, 0};
        for (int i = 0; i < dim; ++i) b[i] = axis_bump(p[i], lo[i], hi[i], margin, center[i], &db[i]);
        Vec g{0, 0, 0};
        for (int i = 0; i < dim; ++i) {
            double prod = db[i];
            for (int j = 0; j < dim; ++j)
                if (j != i) prod *= b[j];
            g[i] = prod;
        }
        return g;
    };
    return SmoothFunction::generic(dim, value, grad, grown);
}

std::vector<SmoothFunction> partition_of_unity(int dim, const std::vector<SupportBox>& cover,
                                               double margin) {
    std::vector<SmoothFunction> bumps;
    bumps.reserve(cover.size());
    for (const auto& b : cover) bumps.push_back(bump(dim, b, margin));

    // coverage check on a verification grid
    const int res = 64;
    double min_sum = 1e300;
    const int n3 = (dim == 3) ? res : 1;
    for (int k = 0; k < n3; ++k)
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) {
                Vec p = vec3(static_cast<double>(j) / res, static_cast<double>(i) / res,
                             static_cast<double>(k) / res);
                double s = 0.0;
                for (const auto& b : bumps) s += b.value(p);
                min_sum = std::min(min_sum, s);
            }
    if (!(min_sum > 1e-9)) throw std::invalid_argument("not a cover");

    std::vector<SmoothFunction> rho;
    rho.reserve(bumps.size());
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        auto all = bumps;
        auto mine = bumps[i];
        auto value = [all, mine](const Vec& p) {
            double s = 0.0;
            for (const auto& b : all) s += b.value(p);
            return mine.value(p) / s;
        };
        auto grad = [all, mine](const Vec& p) {
            double s = 0.0;
            Vec ds{0, 0, 0};
            for (const auto& b : all) {
                s += b.value(p);
                ds = ds + b.gradient(p);
            }
            double v = mine.value(p);
            Vec dv = mine.gradient(p);
            // quotient rule
            return (1.0 / s) * dv - (v / (s * s)) * ds;
        };
        rho.push_back(SmoothFunction::generic(dim, value, grad, bumps[i].support()));
    }
    return rho;
}

// ---------------------------------------------------------------------------
// Dictionary

namespace {

std::vector<std::array<int, 3>> canonical_frequencies(int dim, int D) {
    std::vector<std::array<int, 3>> out;
    const int zmax = (dim == 3) ? D : 0;
    for (int kx = -D; kx <= D; ++kx)
        for (int ky = -D; ky <= D; ++ky)
            for (int kz = -zmax; kz <= zmax; ++kz) {
                std::array<int, 3> k{kx, ky, kz};
                if (k == std::array<int, 3>{0, 0, 0}) continue;
                int lead = kx != 0 ? kx : (ky != 0 ? ky : kz);
                if (lead < 0) continue;
                out.push_back(k);
            }
    return out;
}

std::string freq_label(const std::array<int, 3>& k, bool is_sin, int dim) {
    std::string s = is_sin ? "sin" : "cos";
    s += "(";
    for (int i = 0; i < dim; ++i) {
        if (i) s += ",";
        s += std::to_string(k[static_cast<std::size_t>(i)]);
    }
    s += ")";
    return s;
}

double norm_k(const std::array<int, 3>& k) {
    return std::sqrt(static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                     static_cast<double>(k[2]) * k[2]);
}

}  // namespace

Dictionary build_dictionary(int n, int k, int D) {
    if (D < 0) throw std::invalid_argument("dictionary degree must be nonnegative");
    if (n < 2 || n > 3) throw std::invalid_argument("only T^2 and T^3 are supported");
    Dictionary dict;
    dict.dim = n;
    dict.form_degree = k;
    dict.trig_degree = D;
    dict.id = static_cast<std::uint64_t>(n) * 1000003ull + static_cast<std::uint64_t>(k) * 1009ull +
              static_cast<std::uint64_t>(D) + 0x9e3779b97f4a7c15ull;

    // constant basis forms, flagged closed
    for (int mask = 1; mask < (1 << n); ++mask) {
        if (mask_degree(mask) != k) continue;
        DictionaryEntry e;
        e.form = KForm::basis(n, mask);
        e.flag = EntryFlag::closed;
        e.sup_norm = 1.0;
        e.label = mask_label(mask, n);
        dict.entries.push_back(std::move(e));
    }

    const auto freqs = canonical_frequencies(n, D);

    // single trig-monomial coefficients on every degree-k basis form
    for (const auto& kv : freqs) {
        for (int trig = 0; trig < 2; ++trig) {
            bool is_sin = trig == 1;
            for (int mask = 1; mask < (1 << n); ++mask) {
                if (mask_degree(mask) != k) continue;
                DictionaryEntry e;
                e.form = KForm::zero(n, k);
                e.form.comps.emplace_back(mask, SmoothFunction::trig(TrigPoly::monomial(n, kv, is_sin)));
                e.flag = EntryFlag::general;
                e.sup_norm = 1.0;
                e.label = freq_label(kv, is_sin, n) + " " + mask_label(mask, n);
                dict.entries.push_back(std::move(e));
            }
        }
    }

    // exact forms dg for trig monomials g (k = 1 only)
    if (k == 1) {
        for (const auto& kv : freqs) {
            for (int trig = 0; trig < 2; ++trig) {
                bool is_sin = trig == 1;
                TrigPoly g = TrigPoly::monomial(n, kv, is_sin);
                DictionaryEntry e;
                e.form = exterior_derivative(KForm::scalar(SmoothFunction::trig(g)));
                e.flag = EntryFlag::exact;
                e.primitive = g;
                e.sup_norm = kTwoPi * norm_k(kv);
                e.label = "d " + freq_label(kv, is_sin, n);
                dict.entries.push_back(std::move(e));
            }
        }
    }
    return dict;
}

double weak_distance(const CurrentVector& a, const CurrentVector& b) {
    if (a.dict_id != b.dict_id || a.pairings.size() != b.pairings.size())
        throw std::invalid_argument("dictionary mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.pairings.size(); ++i)
        d = std::max(d, std::fabs(a.pairings[i] - b.pairings[i]));
    return d;
}

double mass_estimate_proxy(const CurrentVector& v, const Dictionary& dict) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.pairings.size(); ++i)
        m = std::max(m, std::fabs(v.pairings[i]) / dict.entries[i].sup_norm);
    return m;
}

// ---------------------------------------------------------------------------
// Compiled forms

Compiled1Form compile_one_form(const KForm& form) {
    if (form.degree != 1) throw std::invalid_argument("compile_one_form needs a 1-form");
    Compiled1Form out;
    out.dim = form.dim;
    for (const auto& [mask, f] : form.comps) {
        int axis = mask == 1 ? 0 : (mask == 2 ? 1 : 2);
        if (f.has_trig()) {
            for (const auto& t : f.trig_poly().terms())
                out.axis_terms[static_cast<std::size_t>(axis)].push_back(
                    {t.coeff, kTwoPi * t.k[0], kTwoPi * t.k[1], kTwoPi * t.k[2], t.is_sin});
        } else {
            auto g = f;
            out.generic[static_cast<std::size_t>(axis)] = [g](const Vec& p) { return g.value(p); };
            out.has_generic[static_cast<std::size_t>(axis)] = true;
        }
    }
    return out;
}

double Compiled1Form::pair(const Vec& p, const Vec& t) const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double ta = t[a];
        if (ta == 0.0) continue;
        double v = 0.0;
        for (const auto& term : axis_terms[static_cast<std::size_t>(a)]) {
            double phase = term.w0 * p[0] + term.w1 * p[1] + term.w2 * p[2];
            v += term.coeff * (term.is_sin ? std::sin(phase) : std::cos(phase));
        }
        if (has_generic[static_cast<std::size_t>(a)]) v += generic[static_cast<std::size_t>(a)](p);
        s += v * ta;
    }
    return s;
}

}  // namespace ergosol
