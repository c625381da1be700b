#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ergosol/common.hpp"

namespace ergosol {

// ---------------------------------------------------------------------------
// Trigonometric polynomials: exact coefficient calculus on T^n.

struct TrigTerm {
    bool is_sin = false;
    std::array<int, 3> k{0, 0, 0};  // wave vector; canonical: first nonzero > 0
    double coeff = 0.0;
};

class TrigPoly {
  public:
    TrigPoly() = default;
    TrigPoly(int dim, std::vector<TrigTerm> terms);

    static TrigPoly constant(int dim, double c);
    static TrigPoly monomial(int dim, const std::array<int, 3>& k, bool is_sin, double coeff = 1.0);

    double eval(const Vec& p) const;
    Vec gradient(const Vec& p) const;
    TrigPoly partial(int axis) const;

    TrigPoly operator+(const TrigPoly& o) const;
    TrigPoly operator*(const TrigPoly& o) const;
    TrigPoly scaled(double s) const;

    int degree() const;  // max |k_i| over terms
    bool empty() const { return terms_.empty(); }
    double max_abs_coeff() const;
    double coeff_l1() const;  // sup-norm bound
    const std::vector<TrigTerm>& terms() const { return terms_; }
    int dim() const { return dim_; }

  private:
    void canonicalize();
    int dim_ = 2;
    std::vector<TrigTerm> terms_;
};

// ---------------------------------------------------------------------------
// Smooth scalar fields: evaluator + gradient evaluator + support descriptor.

struct SupportBox {
    bool global = true;
    Vec lo{0, 0, 0}, hi{0, 0, 0};
    static SupportBox everywhere() { return SupportBox{}; }
    static SupportBox box(const Vec& lo, const Vec& hi) { return SupportBox{false, lo, hi}; }
};

class SmoothFunction {
  public:
    using ValueFn = std::function<double(const Vec&)>;
    using GradFn = std::function<Vec(const Vec&)>;

    SmoothFunction();  // zero on T^2
    static SmoothFunction zero(int dim);
    static SmoothFunction trig(TrigPoly p);
    static SmoothFunction generic(int dim, ValueFn value, GradFn grad,
                                  SupportBox support = SupportBox::everywhere());

    double value(const Vec& p) const;
    Vec gradient(const Vec& p) const;
    int dim() const { return dim_; }
    const SupportBox& support() const { return support_; }
    bool has_trig() const { return trig_.has_value(); }
    const TrigPoly& trig_poly() const { return *trig_; }

    SmoothFunction scaled(double s) const;
    friend SmoothFunction operator*(const SmoothFunction& a, const SmoothFunction& b);
    friend SmoothFunction operator+(const SmoothFunction& a, const SmoothFunction& b);

  private:
    int dim_ = 2;
    std::optional<TrigPoly> trig_;
    ValueFn value_;
    GradFn grad_;
    SupportBox support_;
};

// ---------------------------------------------------------------------------
// Differential forms with multi-indices stored as axis bitmasks.

int mask_degree(int mask);
int wedge_sign(int mask_a, int mask_b);  // 0 if they overlap
std::string mask_label(int mask, int dim);

struct KForm {
    int dim = 2;
    int degree = 0;
    std::vector<std::pair<int, SmoothFunction>> comps;  // (mask, coefficient), sorted by mask

    static KForm zero(int dim, int degree);
    static KForm scalar(SmoothFunction f);
    static KForm basis(int dim, int mask);  // constant-one coefficient on dx_mask
    static KForm one_form(int dim, std::vector<SmoothFunction> by_axis);

    const SmoothFunction* component(int mask) const;
    KForm scaled(double s) const;
    bool all_trig() const;
};

/// Throws std::invalid_argument("top degree") at degree == dim.
KForm exterior_derivative(const KForm& form);

/// Throws std::invalid_argument("degree overflow") past top degree.
KForm wedge(const KForm& a, const KForm& b);

/// Periodic trapezoid (= uniform grid mean) of a top-degree form; exact for
/// trig-poly coefficients below the grid Nyquist limit.
/// Throws std::invalid_argument("not a top-degree form").
double integrate_torus(const KForm& form, int resolution);

// ---------------------------------------------------------------------------
// Curves and line integrals. Polylines live in lift coordinates (positions
// are reduced mod 1 only at evaluation time).

struct Polyline {
    int dim = 2;
    std::vector<Vec> pts;
    bool closed = false;

    double length() const;
    int segment_count() const;
};

struct ParametricCurve {
    int dim = 2;
    std::function<Vec(double)> position;
    std::function<Vec(double)> velocity;
    double t0 = 0.0, t1 = 1.0;
};

double line_integral(const Polyline& curve, const KForm& one_form, int nodes_per_unit = 4096);
double line_integral(const ParametricCurve& curve, const KForm& one_form, int nodes = 4096);

// ---------------------------------------------------------------------------
// Bumps and partitions of unity.

/// Smooth plateau function: 1 on `box`, 0 outside `box` grown by `margin`,
/// standard exp(-1/t) transition with closed-form gradient.
/// Throws std::invalid_argument("margin must be positive").
SmoothFunction bump(int dim, const SupportBox& box, double margin);

/// Normalized bumps over the grown boxes. Throws
/// std::invalid_argument("not a cover") when the grid detects a gap.
std::vector<SmoothFunction> partition_of_unity(int dim, const std::vector<SupportBox>& cover,
                                               double margin);

// ---------------------------------------------------------------------------
// Test-form dictionary and pairing vectors.

enum class EntryFlag { closed, exact, general };

struct DictionaryEntry {
    KForm form;
    EntryFlag flag = EntryFlag::general;
    std::optional<TrigPoly> primitive;  // for exact entries: form == d(primitive)
    double sup_norm = 1.0;              // pointwise-norm bound
    std::string label;
};

struct Dictionary {
    int dim = 2;
    int form_degree = 1;
    int trig_degree = 1;
    std::vector<DictionaryEntry> entries;
    std::uint64_t id = 0;

    int size() const { return static_cast<int>(entries.size()); }
};

/// All degree-k forms with single trig-monomial coefficients up to per-axis
/// degree D, the constant basis forms (flagged closed), and the exact forms
/// dg with their primitives stored.
Dictionary build_dictionary(int n, int k, int D);

struct CurrentVector {
    std::vector<double> pairings;
    double mass_estimate = 0.0;
    std::uint64_t dict_id = 0;
};

/// Max pairing difference over the dictionary. Throws
/// std::invalid_argument("dictionary mismatch").
double weak_distance(const CurrentVector& a, const CurrentVector& b);

/// sup over unit-sup-norm entries of |pairing|.
double mass_estimate_proxy(const CurrentVector& v, const Dictionary& dict);

// ---------------------------------------------------------------------------
// Compiled 1-forms: flattened trig terms for the pairing kernels.

struct Compiled1Form {
    struct Term {
        double coeff;
        double w0, w1, w2;  // 2*pi*k
        bool is_sin;
    };
    int dim = 2;
    std::array<std::vector<Term>, 3> axis_terms;
    std::array<std::function<double(const Vec&)>, 3> generic;  // fallback per axis
    std::array<bool, 3> has_generic{false, false, false};

    double pair(const Vec& p, const Vec& t) const;
};

Compiled1Form compile_one_form(const KForm& form);

}  // namespace ergosol
