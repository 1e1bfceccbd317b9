#include <algorithm>
#include <cmath>
#include <limits>

#include "sjko/error.hpp"
#include "sjko/ot.hpp"

namespace sjko {

namespace {

double sqdist(const std::array<double, 2>& p, const std::array<double, 2>& q) {
    const double dx = p[0] - q[0], dy = p[1] - q[1];
    return dx * dx + dy * dy;
}

}  // namespace

// Successive shortest paths on the bipartite transportation network, with
// Dijkstra on reduced costs. Node layout: 0 = super source, 1..n sources,
// n+1..n+m sinks, n+m+1 = super sink.
OTResult brute_force_lp(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    a.validate();
    b.validate();
    require(a.size() <= 64 && b.size() <= 64, "brute_force_lp: support too large (max 64 points)");
    require(a.dim == b.dim, "brute_force_lp: dimension mismatch");
    const double ta = a.total(), tb = b.total();
    require(std::abs(ta - tb) <= 1e-9 * ta, "brute_force_lp: total masses differ");

    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    const int S = 0, T = n + m + 1, V = n + m + 2;
    std::vector<double> c(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) c[i * m + j] = sqdist(a.points[i], b.points[j]);

    std::vector<double> supply(n), demand(m);
    for (int i = 0; i < n; ++i) supply[i] = a.weights[i];
    for (int j = 0; j < m; ++j) demand[j] = b.weights[j] * ta / tb;
    std::vector<double> x(static_cast<std::size_t>(n) * m, 0.0);
    std::vector<double> sent(n, 0.0), recv(m, 0.0);

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double tiny = 1e-15;
    std::vector<double> pi(V, 0.0), dist(V);
    std::vector<int> prev(V);
    std::vector<char> done(V);

    // residual edge u->v: returns (reduced cost, exists)
    auto edge = [&](int u, int v, double& cost) -> bool {
        if (u == S && v >= 1 && v <= n) { cost = 0.0; return supply[v - 1] - sent[v - 1] > tiny; }
        if (v == S && u >= 1 && u <= n) { cost = 0.0; return sent[u - 1] > tiny; }
        if (v == T && u > n && u < T) { cost = 0.0; return demand[u - n - 1] - recv[u - n - 1] > tiny; }
        if (u == T && v > n && v < T) { cost = 0.0; return recv[v - n - 1] > tiny; }
        if (u >= 1 && u <= n && v > n && v < T) { cost = c[(u - 1) * m + (v - n - 1)]; return true; }
        if (v >= 1 && v <= n && u > n && u < T) {
            cost = -c[(v - 1) * m + (u - n - 1)];
            return x[(v - 1) * m + (u - n - 1)] > tiny;
        }
        return false;
    };

    int iterations = 0;
    const int max_iter = 8 * (n + m) * (n + m) + 100;
    while (iterations < max_iter) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(prev.begin(), prev.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        dist[S] = 0.0;
        for (int it = 0; it < V; ++it) {
            int u = -1;
            for (int v = 0; v < V; ++v)
                if (!done[v] && dist[v] < inf && (u < 0 || dist[v] < dist[u])) u = v;
            if (u < 0) break;
            done[u] = 1;
            for (int v = 0; v < V; ++v) {
                if (done[v]) continue;
                double cost;
                if (!edge(u, v, cost)) continue;
                const double nd = dist[u] + std::max(0.0, cost + pi[u] - pi[v]);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    prev[v] = u;
                }
            }
        }
        if (dist[T] == inf) break;
        double dmax = 0.0;
        for (int v = 0; v < V; ++v)
            if (dist[v] < inf) dmax = std::max(dmax, dist[v]);
        for (int v = 0; v < V; ++v) pi[v] += dist[v] < inf ? dist[v] : dmax;

        double flow = inf;
        for (int v = T; v != S; v = prev[v]) {
            const int u = prev[v];
            if (u == S) flow = std::min(flow, supply[v - 1] - sent[v - 1]);
            else if (v == T) flow = std::min(flow, demand[u - n - 1] - recv[u - n - 1]);
            else if (u > n && v <= n) flow = std::min(flow, x[(v - 1) * m + (u - n - 1)]);
        }
        for (int v = T; v != S; v = prev[v]) {
            const int u = prev[v];
            if (u == S) sent[v - 1] += flow;
            else if (v == T) recv[u - n - 1] += flow;
            else if (u <= n) x[(u - 1) * m + (v - n - 1)] += flow;
            else x[(v - 1) * m + (u - n - 1)] -= flow;
        }
        ++iterations;
    }

    OTResult r;
    r.iterations = iterations;
    r.source_weights = a.weights;
    r.dual_f.resize(n);
    r.dual_g.resize(m);
    for (int i = 0; i < n; ++i) r.dual_f[i] = -pi[1 + i];
    for (int j = 0; j < m; ++j) r.dual_g[j] = pi[n + 1 + j];
    // gauge: f on the first loaded source is zero
    const double shift = r.dual_f[0];
    for (double& f : r.dual_f) f -= shift;
    for (double& g : r.dual_g) g += shift;

    double cost = 0.0, err = 0.0;
    r.map.assign(n, {0.0, 0.0});
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) {
            const double v = x[i * m + j];
            if (v <= 0.0) continue;
            r.plan.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), v});
            cost += v * c[i * m + j];
            row += v;
            r.map[i][0] += v * b.points[j][0];
            r.map[i][1] += v * b.points[j][1];
        }
        if (row > 0.0) {
            r.map[i][0] /= row;
            r.map[i][1] /= row;
        } else {
            r.map[i] = a.points[i];
        }
        err += std::abs(row - a.weights[i]);
    }
    for (int j = 0; j < m; ++j) err += std::abs(recv[j] - demand[j]);
    r.cost = cost;
    r.marginal_error = err;
    r.converged = err <= 1e-9 * ta;
    r.potential.resize(n);
    for (int i = 0; i < n; ++i) r.potential[i] = 0.5 * r.dual_f[i];
    return r;
}

}  // namespace sjko
