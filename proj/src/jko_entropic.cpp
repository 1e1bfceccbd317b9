#include <algorithm>
#include <cmath>
#include <limits>

#include "sjko/detail/sinkhorn.hpp"
#include "sjko/error.hpp"
#include "sjko/jko.hpp"

// Entropic proximal step: scaling iterations where the row update is the
// usual Sinkhorn softmin (rho_tilde is a hard marginal) and the column update
// is the cellwise KL prox of 2h (F + V) / eps.

namespace sjko::detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

JKOStepResult jko_entropic(const GridMeasure& rho_tilde, const ScalarField& V, const EnergySpec& E, double h,
                           const JKOOptions& opt, JKOWarmStart* warm) {
    const Domain& d = rho_tilde.domain();
    require(V.domain == d, "jko: potential lives on a different domain");
    const std::size_t n = d.size();
    const double vol = d.cell_volume();
    double eps = opt.entropic.epsilon;
    if (eps <= 0.0) {
        const double dx = d.dim == 2 ? std::max(d.dx(0), d.dx(1)) : d.dx(0);
        eps = dx * dx;
    }

    const GridGibbs K(d);
    const std::vector<double> a = rho_tilde.cell_masses();
    std::vector<double> la(n);
    for (std::size_t i = 0; i < n; ++i) la[i] = a[i] > 0.0 ? std::log(a[i]) : kNegInf;
    const double lvol = std::log(vol);

    const bool warm_ok = warm && warm->f.size() == n && warm->g.size() == n;
    std::vector<double> f = warm_ok ? warm->f : std::vector<double>(n, 0.0);
    std::vector<double> g = warm_ok ? warm->g : std::vector<double>(n, 0.0);
    std::vector<double> r(n, 0.0), ghat(n), ha(n), hb(n), fnew(n);

    EntropicOptions sched = opt.entropic;
    const auto schedule = eps_schedule(eps, warm_ok ? eps : K.max_cost(), sched);

    JKOStepResult res{rho_tilde};
    res.backend = JKOBackend::entropic_prox;
    double err = std::numeric_limits<double>::infinity();
    int total = 0;
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        const double e = schedule[s];
        const bool last = s + 1 == schedule.size();
        const double stage_tol = last ? opt.tol : std::max(opt.tol, 1e-2);
        const int cap = last ? opt.max_iters : 200;
        const double sigma = 2.0 * h / e;
        for (int it = 0; it < cap && total < opt.max_iters; ++it) {
            for (std::size_t j = 0; j < n; ++j) hb[j] = g[j] == kNegInf ? kNegInf : g[j] + e * lvol;
            K.softmin_rows(hb, e, fnew);
            err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (a[i] <= 0.0) continue;
                err += a[i] * std::abs(1.0 - std::exp((f[i] - fnew[i]) / e));
            }
            f.swap(fnew);
            ++total;
            if (it > 0 && err < stage_tol) break;

            for (std::size_t i = 0; i < n; ++i) ha[i] = a[i] > 0.0 ? f[i] + e * la[i] : kNegInf;
            K.softmin_cols(ha, e, ghat);
            for (std::size_t j = 0; j < n; ++j) {
                const double logp = -ghat[j] / e;
                // the blur of OT_eps acts like (eps/2) Ent(rho); subtracting it doubles sigma and log p
                const double rj = opt.bias_correction ? E.prox_kl(2.0 * sigma, V.values[j], 2.0 * logp)
                                                      : E.prox_kl(sigma, V.values[j], logp);
                r[j] = rj;
                g[j] = rj > 0.0 ? e * (std::log(rj) - logp) : kNegInf;
            }
        }
    }
    res.iterations = total;
    res.residual = err;
    res.converged = err <= opt.tol;
    if (warm) {
        warm->f = f;
        warm->g = g;
    }

    bool finite = true;
    for (double v : r) finite = finite && std::isfinite(v) && v >= 0.0;
    double mass = 0.0;
    for (double v : r) mass += v * vol;
    if (!finite || !(mass > 0.0)) {
        res.converged = false;
        res.residual = std::numeric_limits<double>::infinity();
        return res;
    }
    res.rho = GridMeasure::from_density(d, std::move(r));
    return res;
}

}  // namespace sjko::detail
