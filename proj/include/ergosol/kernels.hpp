#pragma once

#include <cstdint>
#include <vector>

#include "ergosol/common.hpp"
#include "ergosol/parallel.hpp"

namespace ergosol::kernels {

// Data-parallel inner loops used across the library. Every parallel kernel
// has a serial reference twin under kernels::ref; the benchmark target and
// the kernel tests compare the two. Parallel results are combined from
// per-index partials in index order, so they are identical for any thread
// count.

/// Mean of f over the uniform res x res grid on [0,1)^2 (periodic trapezoid).
template <class F>
double grid_mean_2d(int res, F&& f) {
    const double h = 1.0 / res;
    std::vector<double> row(res);
    par::parallel_for(res, [&](std::int64_t i) {
        const double y = i * h;
        double s = 0.0;
        for (int j = 0; j < res; ++j) s += f(j * h, y);
        row[i] = s;
    });
    double total = 0.0;
    for (double r : row) total += r;
    return total / (static_cast<double>(res) * res);
}

template <class F>
double grid_mean_3d(int res, F&& f) {
    const double h = 1.0 / res;
    std::vector<double> slab(res);
    par::parallel_for(res, [&](std::int64_t k) {
        const double z = k * h;
        double s = 0.0;
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) s += f(j * h, i * h, z);
        slab[k] = s;
    });
    double total = 0.0;
    for (double r : slab) total += r;
    return total / (static_cast<double>(res) * res * res);
}

/// Quadrature nodes of a weighted curve family: position plus tangent
/// premultiplied by arc weight. Pairing a 1-form against the family is a
/// single fused loop per dictionary entry.
struct QuadNodes {
    std::vector<double> px, py, pz;
    std::vector<double> tx, ty, tz;
    std::size_t size() const { return px.size(); }
    void reserve(std::size_t n) {
        px.reserve(n); py.reserve(n); pz.reserve(n);
        tx.reserve(n); ty.reserve(n); tz.reserve(n);
    }
    void push(const Vec& p, const Vec& t) {
        px.push_back(p[0]); py.push_back(p[1]); pz.push_back(p[2]);
        tx.push_back(t[0]); ty.push_back(t[1]); tz.push_back(t[2]);
    }
};

/// Sum over nodes of <entry(p), t>. `entry(p, t)` returns the pointwise
/// pairing; kept generic so compiled trig forms inline.
template <class EntryEval>
double pair_nodes(const QuadNodes& nodes, EntryEval&& entry) {
    const std::size_t n = nodes.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec p{nodes.px[i], nodes.py[i], nodes.pz[i]};
        Vec t{nodes.tx[i], nodes.ty[i], nodes.tz[i]};
        s += entry(p, t);
    }
    return s;
}

/// Pair a batch of entries against shared nodes, parallel over entries.
/// `eval(k, p, t)` evaluates entry k.
template <class BatchEval>
std::vector<double> pair_batch(const QuadNodes& nodes, int n_entries, BatchEval&& eval) {
    std::vector<double> out(n_entries, 0.0);
    par::parallel_for(n_entries, [&](std::int64_t k) {
        out[k] = pair_nodes(nodes, [&](const Vec& p, const Vec& t) { return eval(static_cast<int>(k), p, t); });
    });
    return out;
}

/// Time averages of each observable along orbits of `step`, one row per
/// start point. Parallel over starts.
template <class Step, class Obs>
std::vector<std::vector<double>> orbit_averages(Step&& step, const std::vector<double>& starts,
                                                const std::vector<Obs>& observables, std::int64_t iters) {
    const int n_obs = static_cast<int>(observables.size());
    std::vector<std::vector<double>> avg(starts.size(), std::vector<double>(n_obs, 0.0));
    par::parallel_for(static_cast<std::int64_t>(starts.size()), [&](std::int64_t s) {
        std::vector<double> acc(n_obs, 0.0);
        double x = starts[s];
        for (std::int64_t n = 0; n < iters; ++n) {
            for (int k = 0; k < n_obs; ++k) acc[k] += observables[k](x);
            x = step(x);
        }
        for (int k = 0; k < n_obs; ++k) avg[s][k] = acc[k] / static_cast<double>(iters);
    });
    return avg;
}

namespace ref {

template <class F>
double grid_mean_2d(int res, F&& f) {
    const double h = 1.0 / res;
    double s = 0.0;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) s += f(j * h, i * h);
    return s / (static_cast<double>(res) * res);
}

template <class F>
double grid_mean_3d(int res, F&& f) {
    const double h = 1.0 / res;
    double s = 0.0;
    for (int k = 0; k < res; ++k)
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) s += f(j * h, i * h, k * h);
    return s / (static_cast<double>(res) * res * res);
}

template <class BatchEval>
std::vector<double> pair_batch(const QuadNodes& nodes, int n_entries, BatchEval&& eval) {
    std::vector<double> out(n_entries, 0.0);
    for (int k = 0; k < n_entries; ++k)
        out[k] = pair_nodes(nodes, [&](const Vec& p, const Vec& t) { return eval(k, p, t); });
    return out;
}

template <class Step, class Obs>
std::vector<std::vector<double>> orbit_averages(Step&& step, const std::vector<double>& starts,
                                                const std::vector<Obs>& observables, std::int64_t iters) {
    const int n_obs = static_cast<int>(observables.size());
    std::vector<std::vector<double>> avg(starts.size(), std::vector<double>(n_obs, 0.0));
    for (std::size_t s = 0; s < starts.size(); ++s) {
        std::vector<double> acc(n_obs, 0.0);
        double x = starts[s];
        for (std::int64_t n = 0; n < iters; ++n) {
            for (int k = 0; k < n_obs; ++k) acc[k] += observables[k](x);
            x = step(x);
        }
        for (int k = 0; k < n_obs; ++k) avg[s][k] = acc[k] / static_cast<double>(iters);
    }
    return avg;
}

}  // namespace ref

}  // namespace ergosol::kernels
