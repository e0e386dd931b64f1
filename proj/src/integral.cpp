#include "qcm/integral.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

std::complex<double> unit_phase(double x) {
    return {std::cos(tau * x), std::sin(tau * x)};
}

struct DPoly {
    struct DTerm {
        double c;
        std::vector<std::pair<int, int>> powers;
    };
    std::vector<DTerm> terms;
    double constant = 0;

    static DPoly compile(const Poly& f) {
        DPoly dp;
        for (const Term& t : f.terms()) {
            if (t.degree() == 0) {
                dp.constant += t.c.get_d();
                continue;
            }
            DTerm dt;
            dt.c = t.c.get_d();
            for (size_t j = 0; j < t.e.size(); ++j)
                if (t.e[j] > 0) dt.powers.push_back({static_cast<int>(j), t.e[j]});
            dp.terms.push_back(std::move(dt));
        }
        return dp;
    }

    double eval(const double* x) const {
        double total = constant;
        for (const auto& t : terms) {
            double v = t.c;
            for (auto [j, e] : t.powers) {
                double b = x[j];
                for (int k = 0; k < e; ++k) v *= b;
            }
            total += v;
        }
        return total;
    }
};

std::vector<double> box_lo(const Box& B) {
    std::vector<double> v;
    for (auto& [a, b] : B.sides) v.push_back(a.get_d());
    return v;
}

std::vector<double> box_hi(const Box& B) {
    std::vector<double> v;
    for (auto& [a, b] : B.sides) v.push_back(b.get_d());
    return v;
}

uint64_t ipow(uint64_t b, int e) {
    uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// tensor Gauss-Legendre integral of e(sum_i gamma_i f_i) over the box
std::complex<double> tensor_osc(const std::vector<DPoly>& polys,
                                const std::vector<double>& gamma, const std::vector<double>& lo,
                                const std::vector<double>& hi, int m, Exec exec) {
    const int n = static_cast<int>(lo.size());
    std::vector<double> nodes, weights;
    gauss_legendre(m, nodes, weights);
    const uint64_t inner = ipow(static_cast<uint64_t>(m), n - 1);
    std::vector<std::complex<double>> partial(static_cast<size_t>(m), {0, 0});
    const bool par = (exec == Exec::parallel) && inner > 64;

#pragma omp parallel for schedule(dynamic) if (par)
    for (int i0 = 0; i0 < m; ++i0) {
        std::vector<double> x(static_cast<size_t>(n));
        std::vector<int> idx(static_cast<size_t>(n), 0);
        double scale0 = 0.5 * (hi[0] - lo[0]);
        x[0] = lo[0] + scale0 * (nodes[static_cast<size_t>(i0)] + 1.0);
        std::complex<double> acc(0, 0);
        for (uint64_t flat = 0; flat < inner; ++flat) {
            uint64_t rest = flat;
            double w = weights[static_cast<size_t>(i0)];
            for (int j = 1; j < n; ++j) {
                int ij = static_cast<int>(rest % static_cast<uint64_t>(m));
                rest /= static_cast<uint64_t>(m);
                double scale = 0.5 * (hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)]);
                x[static_cast<size_t>(j)] =
                    lo[static_cast<size_t>(j)] + scale * (nodes[static_cast<size_t>(ij)] + 1.0);
                w *= weights[static_cast<size_t>(ij)];
            }
            double phase = 0;
            for (size_t i = 0; i < polys.size(); ++i) phase += gamma[i] * polys[i].eval(x.data());
            acc += w * unit_phase(phase);
        }
        partial[static_cast<size_t>(i0)] = acc;
    }
    std::complex<double> total(0, 0);
    for (const auto& v : partial) total += v;
    double jac = 1;
    for (int j = 0; j < n; ++j) jac *= 0.5 * (hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)]);
    return total * jac;
}

unsigned mix_seed(unsigned seed, uint64_t k) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<unsigned>(z ^ (z >> 31));
}

} // namespace

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<size_t>(m), 0.0);
    weights.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < m; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = m * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<size_t>(i)] = -x;
        nodes[static_cast<size_t>(m - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[static_cast<size_t>(i)] = w;
        weights[static_cast<size_t>(m - 1 - i)] = w;
    }
}

IntegralEstimate osc_integral(const PolySystem& s, const std::vector<double>& gamma,
                              const Box& B, const std::string& method, std::uint64_t budget,
                              double tol, unsigned seed, Exec exec) {
    if (static_cast<int>(gamma.size()) != s.R) throw input_error("gamma must have length R");
    if (B.dim() != s.n) throw input_error("box dimension mismatch");
    PolySystem tilde = top_degree_part(s);
    IntegralEstimate out;
    out.kind = "osc";
    out.method = method;
    out.seed = seed;

    std::vector<double> lo = box_lo(B), hi = box_hi(B);

    if (method == "quadrature") {
        // independent variable blocks factor the integral; each factor is a
        // low-dimensional tensor quadrature
        std::vector<std::vector<int>> blocks = variable_blocks(tilde);
        std::complex<double> value(1, 0);
        double err = 0;
        uint64_t evals = 0;
        bool converged = true;
        for (const auto& blk : blocks) {
            // restrict each ftilde_i to the block
            std::vector<DPoly> polys;
            for (const Poly& f : tilde.polys) {
                std::vector<Term> mine;
                for (const Term& t : f.terms()) {
                    bool in_block = true;
                    for (size_t j = 0; j < t.e.size(); ++j)
                        if (t.e[j] > 0 &&
                            std::find(blk.begin(), blk.end(), static_cast<int>(j)) == blk.end())
                            in_block = false;
                    if (in_block && t.degree() > 0) mine.push_back(t);
                }
                // compress to block coordinates
                std::vector<Term> compressed;
                for (Term t : mine) {
                    std::vector<int> e;
                    for (int j : blk) e.push_back(t.e[static_cast<size_t>(j)]);
                    compressed.push_back(Term{e, t.c});
                }
                polys.push_back(DPoly::compile(Poly(static_cast<int>(blk.size()), compressed)));
            }
            std::vector<double> blo, bhi;
            for (int j : blk) {
                blo.push_back(lo[static_cast<size_t>(j)]);
                bhi.push_back(hi[static_cast<size_t>(j)]);
            }
            std::complex<double> prev(0, 0), cur(0, 0);
            double diff = 0;
            bool block_conv = false;
            for (int m = 8; ; m *= 2) {
                uint64_t cost = ipow(static_cast<uint64_t>(m), static_cast<int>(blk.size()));
                if (evals + cost > budget) break;
                cur = tensor_osc(polys, gamma, blo, bhi, m, exec);
                evals += cost;
                diff = std::abs(cur - prev);
                if (m > 8 && diff <= tol * std::max(1.0, std::abs(cur))) {
                    block_conv = true;
                    break;
                }
                prev = cur;
            }
            value *= cur;
            err += diff;
            converged = converged && block_conv;
        }
        out.value = value;
        out.std_error = err;
        out.evals = evals;
        out.converged = converged;
        return out;
    }

    if (method != "monte-carlo") throw input_error("unknown integration method: " + method);

    // stratified Monte Carlo along the first coordinate
    std::vector<DPoly> polys;
    for (const Poly& f : tilde.polys) polys.push_back(DPoly::compile(f));
    const uint64_t samples = std::max<uint64_t>(budget, 16);
    const uint64_t strata = std::min<uint64_t>(512, samples);
    double vol = 1;
    for (int j = 0; j < s.n; ++j) vol *= hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)];

    std::vector<double> sum_re(strata, 0), sum_im(strata, 0), sumsq(strata, 0);
    std::vector<uint64_t> cnt(strata, 0);
    const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(static) if (par)
    for (uint64_t k = 0; k < strata; ++k) {
        std::mt19937 rng(mix_seed(seed, k));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        uint64_t nk = samples / strata + (k < samples % strata ? 1 : 0);
        double w0 = (hi[0] - lo[0]) / static_cast<double>(strata);
        std::vector<double> x(static_cast<size_t>(s.n));
        double sre = 0, sim = 0, ssq = 0;
        for (uint64_t it = 0; it < nk; ++it) {
            x[0] = lo[0] + w0 * (static_cast<double>(k) + unif(rng));
            for (int j = 1; j < s.n; ++j)
                x[static_cast<size_t>(j)] =
                    lo[static_cast<size_t>(j)] +
                    (hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)]) * unif(rng);
            double phase = 0;
            for (size_t i = 0; i < polys.size(); ++i) phase += gamma[i] * polys[i].eval(x.data());
            std::complex<double> e = unit_phase(phase);
            sre += e.real();
            sim += e.imag();
            ssq += std::norm(e);
        }
        sum_re[k] = sre;
        sum_im[k] = sim;
        sumsq[k] = ssq;
        cnt[k] = nk;
    }
    double tre = 0, tim = 0, tsq = 0;
    uint64_t tn = 0;
    for (uint64_t k = 0; k < strata; ++k) {
        tre += sum_re[k];
        tim += sum_im[k];
        tsq += sumsq[k];
        tn += cnt[k];
    }
    double mre = tre / static_cast<double>(tn), mim = tim / static_cast<double>(tn);
    double var = tsq / static_cast<double>(tn) - (mre * mre + mim * mim);
    out.value = std::complex<double>(mre, mim) * vol;
    out.std_error = vol * std::sqrt(std::max(0.0, var) / static_cast<double>(tn));
    out.evals = tn;
    return out;
}

IntegralEstimate J_truncated(const PolySystem& s, const std::vector<double>& mu, double Phi,
                             const Box& B, std::uint64_t budget, double tol, Exec exec) {
    if (static_cast<int>(mu.size()) != s.R) throw input_error("mu must have length R");
    if (Phi < 0) throw input_error("Phi must be non-negative");
    IntegralEstimate out;
    out.kind = "J_truncated";
    out.method = "quadrature";
    if (Phi == 0) {
        out.value = 0;
        out.converged = true;
        return out;
    }

    std::complex<double> prev(0, 0), cur(0, 0);
    double diff = 0;
    bool conv = false;
    uint64_t evals = 0;
    for (int m = 16; m <= 128; m *= 2) {
        const uint64_t outer = ipow(static_cast<uint64_t>(m), s.R);
        std::vector<double> nodes, weights;
        gauss_legendre(m, nodes, weights);
        cur = {0, 0};
        std::vector<double> gamma(static_cast<size_t>(s.R));
        for (uint64_t flat = 0; flat < outer; ++flat) {
            uint64_t rest = flat;
            double w = 1;
            for (int i = 0; i < s.R; ++i) {
                int idx = static_cast<int>(rest % static_cast<uint64_t>(m));
                rest /= static_cast<uint64_t>(m);
                gamma[static_cast<size_t>(i)] = Phi * nodes[static_cast<size_t>(idx)];
                w *= Phi * weights[static_cast<size_t>(idx)];
            }
            IntegralEstimate inner =
                osc_integral(s, gamma, B, "quadrature", 4'000'000ULL, tol * 0.03, 1, exec);
            evals += inner.evals;
            double dot = 0;
            for (int i = 0; i < s.R; ++i)
                dot += gamma[static_cast<size_t>(i)] * mu[static_cast<size_t>(i)];
            cur += w * inner.value * unit_phase(-dot);
        }
        diff = std::abs(cur - prev);
        if (m > 16 && diff <= tol * std::max(1.0, std::abs(cur))) {
            conv = true;
            break;
        }
        prev = cur;
        if (evals > budget) break;
    }
    out.value = cur;
    out.std_error = diff;
    out.evals = evals;
    out.converged = conv;
    return out;
}

namespace {

// real roots of a polynomial (coefficients ascending) inside [lo, hi],
// appended to `roots`; degree <= 2 is closed-form, otherwise sign scanning
// with bisection
void poly_roots_in(const std::vector<double>& c, double lo, double hi,
                   std::vector<double>& roots) {
    int deg = static_cast<int>(c.size()) - 1;
    while (deg > 0 && c[static_cast<size_t>(deg)] == 0.0) --deg;
    if (deg <= 0) return;
    if (deg == 1) {
        double r = -c[0] / c[1];
        if (r >= lo && r <= hi) roots.push_back(r);
        return;
    }
    if (deg == 2) {
        double A = c[2], Bc = c[1], C = c[0];
        double disc = Bc * Bc - 4 * A * C;
        if (disc < 0) return;
        double sd = std::sqrt(disc);
        double q = (Bc >= 0) ? -0.5 * (Bc + sd) : -0.5 * (Bc - sd);
        double r1 = q / A, r2 = (q != 0) ? C / q : r1;
        for (double r : {r1, r2})
            if (r >= lo && r <= hi) roots.push_back(r);
        return;
    }
    auto eval = [&](double x) {
        double v = 0;
        for (int k = deg; k >= 0; --k) v = v * x + c[static_cast<size_t>(k)];
        return v;
    };
    const int cells = 128;
    double prev = eval(lo), px = lo;
    for (int i = 1; i <= cells; ++i) {
        double x = lo + (hi - lo) * i / cells;
        double v = eval(x);
        if (prev == 0) roots.push_back(px);
        else if (prev * v < 0) {
            double a = px, b = x;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (a + b);
                if (eval(a) * eval(mid) <= 0) b = mid;
                else a = mid;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev = v;
        px = x;
    }
    if (prev == 0) roots.push_back(px);
}

// integral over [lo, hi] of prod_i max(0, 1 - t |h_i(s) - mu_i|) with h_i
// given by ascending coefficients; exact piecewise Gauss-Legendre
double fiber_integral(const std::vector<std::vector<double>>& h, const std::vector<double>& mu,
                      double t, double lo, double hi, const std::vector<double>& gl_nodes,
                      const std::vector<double>& gl_weights) {
    std::vector<double> cuts{lo, hi};
    for (size_t i = 0; i < h.size(); ++i) {
        for (double shift : {mu[i] - 1.0 / t, mu[i], mu[i] + 1.0 / t}) {
            std::vector<double> c = h[i];
            c[0] -= shift;
            poly_roots_in(c, lo, hi, cuts);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    auto heval = [&](const std::vector<double>& c, double x) {
        double v = 0;
        for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) v = v * x + c[static_cast<size_t>(k)];
        return v;
    };
    double total = 0;
    for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        double a = cuts[seg], b = cuts[seg + 1];
        if (b - a < 1e-15) continue;
        double mid = 0.5 * (a + b);
        bool alive = true;
        for (size_t i = 0; i < h.size() && alive; ++i)
            if (1.0 - t * std::abs(heval(h[i], mid) - mu[i]) <= 0) alive = false;
        if (!alive) continue;
        // integrand is polynomial on this piece: Gauss-Legendre is exact
        double scale = 0.5 * (b - a);
        double acc = 0;
        for (size_t k = 0; k < gl_nodes.size(); ++k) {
            double x = mid + scale * gl_nodes[k];
            double w = 1;
            for (size_t i = 0; i < h.size(); ++i)
                w *= std::max(0.0, 1.0 - t * std::abs(heval(h[i], x) - mu[i]));
            acc += gl_weights[k] * w;
        }
        total += acc * scale;
    }
    return total;
}

} // namespace

IntegralEstimate J_schmidt(const PolySystem& s, const std::vector<double>& mu, double t,
                           std::uint64_t samples, unsigned seed, const Box& B, Exec exec,
                           const std::string& estimator) {
    if (static_cast<int>(mu.size()) != s.R) throw input_error("mu must have length R");
    if (t <= 0) throw input_error("t must be positive");
    if (B.dim() != s.n) throw input_error("box dimension mismatch");
    PolySystem tilde = top_degree_part(s);
    IntegralEstimate out;
    out.kind = "schmidt";
    out.method = "monte-carlo";
    out.seed = seed;

    std::vector<double> lo = box_lo(B), hi = box_hi(B);
    double tR = std::pow(t, s.R);

    if (estimator == "plain" || s.n == 1) {
        std::vector<DPoly> polys;
        for (const Poly& f : tilde.polys) polys.push_back(DPoly::compile(f));
        double vol = 1;
        for (int j = 0; j < s.n; ++j) vol *= hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)];
        const uint64_t strata = std::min<uint64_t>(1024, samples);
        std::vector<double> sums(strata, 0), sq(strata, 0);
        std::vector<uint64_t> cnt(strata, 0);
        const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(static) if (par)
        for (uint64_t k = 0; k < strata; ++k) {
            std::mt19937 rng(mix_seed(seed, k));
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            uint64_t nk = samples / strata + (k < samples % strata ? 1 : 0);
            double w0 = (hi[0] - lo[0]) / static_cast<double>(strata);
            std::vector<double> x(static_cast<size_t>(s.n));
            double acc = 0, accsq = 0;
            for (uint64_t it = 0; it < nk; ++it) {
                x[0] = lo[0] + w0 * (static_cast<double>(k) + unif(rng));
                for (int j = 1; j < s.n; ++j)
                    x[static_cast<size_t>(j)] =
                        lo[static_cast<size_t>(j)] +
                        (hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)]) * unif(rng);
                double w = tR;
                for (int i = 0; i < s.R; ++i)
                    w *= std::max(0.0, 1.0 - t * std::abs(polys[static_cast<size_t>(i)].eval(x.data()) -
                                                          mu[static_cast<size_t>(i)]));
                acc += w;
                accsq += w * w;
            }
            sums[k] = acc;
            sq[k] = accsq;
            cnt[k] = nk;
        }
        double tot = 0, totsq = 0;
        uint64_t tn = 0;
        for (uint64_t k = 0; k < strata; ++k) {
            tot += sums[k];
            totsq += sq[k];
            tn += cnt[k];
        }
        double mean = tot / static_cast<double>(tn);
        double var = totsq / static_cast<double>(tn) - mean * mean;
        out.value = mean * vol;
        out.std_error = vol * std::sqrt(std::max(0.0, var) / static_cast<double>(tn));
        out.evals = tn;
        return out;
    }

    // conditioned estimator: sample the first n-1 coordinates, integrate the
    // last coordinate analytically (piecewise-polynomial fiber integral)
    const int n = s.n;
    // decompose each ftilde_i by powers of x_n
    int max_e = 0;
    for (const Poly& f : tilde.polys)
        for (const Term& t2 : f.terms()) max_e = std::max(max_e, t2.e[static_cast<size_t>(n - 1)]);
    // coefficients c_{i,k} as polynomials in the first n-1 variables
    std::vector<std::vector<DPoly>> coef(static_cast<size_t>(s.R));
    for (int i = 0; i < s.R; ++i) {
        for (int k = 0; k <= max_e; ++k) {
            std::vector<Term> terms;
            for (const Term& t2 : tilde.polys[static_cast<size_t>(i)].terms()) {
                if (t2.e[static_cast<size_t>(n - 1)] != k) continue;
                std::vector<int> e(t2.e.begin(), t2.e.end() - 1);
                terms.push_back(Term{e, t2.c});
            }
            coef[static_cast<size_t>(i)].push_back(DPoly::compile(Poly(n - 1, terms)));
        }
    }
    std::vector<double> gl_nodes, gl_weights;
    gauss_legendre(16, gl_nodes, gl_weights);

    double vol = 1;
    for (int j = 0; j + 1 < n; ++j) vol *= hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)];
    const uint64_t strata = std::min<uint64_t>(1024, samples);
    std::vector<double> sums(strata, 0), sq(strata, 0);
    std::vector<uint64_t> cnt(strata, 0);
    const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(static) if (par)
    for (uint64_t k = 0; k < strata; ++k) {
        std::mt19937 rng(mix_seed(seed, k));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        uint64_t nk = samples / strata + (k < samples % strata ? 1 : 0);
        double w0 = (n > 1) ? (hi[0] - lo[0]) / static_cast<double>(strata) : 0;
        std::vector<double> y(static_cast<size_t>(n - 1));
        std::vector<std::vector<double>> h(static_cast<size_t>(s.R),
                                           std::vector<double>(static_cast<size_t>(max_e + 1)));
        double acc = 0, accsq = 0;
        for (uint64_t it = 0; it < nk; ++it) {
            y[0] = lo[0] + w0 * (static_cast<double>(k) + unif(rng));
            for (int j = 1; j + 1 < n; ++j)
                y[static_cast<size_t>(j)] =
                    lo[static_cast<size_t>(j)] +
                    (hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)]) * unif(rng);
            for (int i = 0; i < s.R; ++i)
                for (int kk = 0; kk <= max_e; ++kk)
                    h[static_cast<size_t>(i)][static_cast<size_t>(kk)] =
                        coef[static_cast<size_t>(i)][static_cast<size_t>(kk)].eval(y.data());
            double w = tR * fiber_integral(h, mu, t, lo[static_cast<size_t>(n - 1)],
                                           hi[static_cast<size_t>(n - 1)], gl_nodes, gl_weights);
            acc += w;
            accsq += w * w;
        }
        sums[k] = acc;
        sq[k] = accsq;
        cnt[k] = nk;
    }
    double tot = 0, totsq = 0;
    uint64_t tn = 0;
    for (uint64_t k = 0; k < strata; ++k) {
        tot += sums[k];
        totsq += sq[k];
        tn += cnt[k];
    }
    double mean = tot / static_cast<double>(tn);
    double var = totsq / static_cast<double>(tn) - mean * mean;
    out.value = mean * vol;
    out.std_error = vol * std::sqrt(std::max(0.0, var) / static_cast<double>(tn));
    out.evals = tn;
    return out;
}

namespace {

double minor_at(const PolySystem& tilde, const std::vector<int>& I,
                const std::vector<double>& x0) {
    // determinant of the R x R Jacobian block at x0
    const int R = tilde.R;
    std::vector<std::vector<double>> m(static_cast<size_t>(R), std::vector<double>(static_cast<size_t>(R)));
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j)
            m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                tilde.polys[static_cast<size_t>(i)].derivative(I[static_cast<size_t>(j)]).eval(x0);
    double det = 1;
    for (int c = 0; c < R; ++c) {
        int piv = c;
        for (int r = c + 1; r < R; ++r)
            if (std::abs(m[static_cast<size_t>(r)][static_cast<size_t>(c)]) >
                std::abs(m[static_cast<size_t>(piv)][static_cast<size_t>(c)]))
                piv = r;
        if (m[static_cast<size_t>(piv)][static_cast<size_t>(c)] == 0) return 0;
        if (piv != c) {
            std::swap(m[static_cast<size_t>(piv)], m[static_cast<size_t>(c)]);
            det = -det;
        }
        det *= m[static_cast<size_t>(c)][static_cast<size_t>(c)];
        for (int r = c + 1; r < R; ++r) {
            double f = m[static_cast<size_t>(r)][static_cast<size_t>(c)] /
                       m[static_cast<size_t>(c)][static_cast<size_t>(c)];
            for (int cc = c; cc < R; ++cc)
                m[static_cast<size_t>(r)][static_cast<size_t>(cc)] -=
                    f * m[static_cast<size_t>(c)][static_cast<size_t>(cc)];
        }
    }
    return det;
}

double binom(int n, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

} // namespace

RealZeroWitness make_real_zero_witness(const PolySystem& s, const std::vector<double>& x0,
                                       double Lambda, double tol) {
    if (static_cast<int>(x0.size()) != s.n) throw input_error("witness dimension mismatch");
    if (Lambda < 1) throw input_error("need Lambda >= 1");
    PolySystem tilde = top_degree_part(s);
    double sup = 0;
    for (double v : x0) sup = std::max(sup, std::abs(v));
    if (sup > Lambda + 1e-12) throw input_error("witness exceeds Lambda");
    for (const Poly& f : tilde.polys)
        if (std::abs(f.eval(x0)) > tol) throw input_error("witness is not a zero of ftilde");
    RealZeroWitness w;
    w.x0 = x0;
    w.Lambda = Lambda;
    for (const auto& I : column_subsets(s.n, s.R)) {
        double v = std::abs(minor_at(tilde, I, x0));
        if (v > w.M) {
            w.M = v;
            w.best_I = I;
        }
    }
    if (w.M <= 0) throw input_error("witness has vanishing Jacobian minors");
    return w;
}

NeighborhoodEstimate ift_neighborhood(const RealZeroWitness& w, const PolySystem& s,
                                      unsigned seed, int boundary_samples) {
    PolySystem tilde = top_degree_part(s);
    Heights h = heights(s);
    const double Ct = h.Ctilde.get_d();
    const double lam_exp = s.R * (s.d - 1) - 1;
    const double lam = std::pow(w.Lambda, lam_exp);

    NeighborhoodEstimate nb;
    nb.M = w.M;
    double a = 1.0 / (8.0 * s.n * s.n * s.d * s.d * binom(s.n, s.R));

    // g = (ftilde_1, ..., ftilde_R, coordinates outside best_I); sup distance
    // is order-free
    std::vector<int> id_coords;
    for (int j = 0; j < s.n; ++j)
        if (std::find(w.best_I.begin(), w.best_I.end(), j) == w.best_I.end())
            id_coords.push_back(j);
    auto g_dist = [&](const std::vector<double>& x) {
        double dist = 0;
        for (int i = 0; i < s.R; ++i)
            dist = std::max(dist, std::abs(tilde.polys[static_cast<size_t>(i)].eval(x) -
                                           tilde.polys[static_cast<size_t>(i)].eval(w.x0)));
        for (int j : id_coords)
            dist = std::max(dist, std::abs(x[static_cast<size_t>(j)] - w.x0[static_cast<size_t>(j)]));
        return dist;
    };

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int attempt = 0; attempt < 10; ++attempt) {
        double U = a * w.M / (std::pow(Ct, s.R) * lam);
        double W = 0.5 * a * w.M * w.M / (std::pow(Ct, 2 * s.R - 1) * lam);
        double min_dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < s.n; ++j)
            for (int sign : {-1, 1}) {
                for (int k = 0; k < boundary_samples; ++k) {
                    std::vector<double> x = w.x0;
                    for (int jj = 0; jj < s.n; ++jj) x[static_cast<size_t>(jj)] += U * unif(rng);
                    x[static_cast<size_t>(j)] = w.x0[static_cast<size_t>(j)] + sign * U;
                    min_dist = std::min(min_dist, g_dist(x));
                }
            }
        if (min_dist >= 2.0 * W * (1.0 - 1e-6)) {
            nb.U_radius = U;
            nb.W_radius = W;
            nb.a_used = a;
            nb.verified = true;
            return nb;
        }
        a *= 0.5;
    }
    nb.a_used = a;
    nb.verified = false;
    throw input_error("ift_neighborhood: boundary inequality failed at every tried constant");
}

double J_lower_bound(const RealZeroWitness& w, const PolySystem& s,
                     const NeighborhoodEstimate& nb, const Box& B) {
    if (!nb.verified) throw input_error("neighborhood estimate is unverified");
    // the change-of-variables argument integrates over U, so U must sit
    // inside the box
    for (int j = 0; j < s.n; ++j) {
        double lo = B.sides[static_cast<size_t>(j)].first.get_d();
        double hi = B.sides[static_cast<size_t>(j)].second.get_d();
        if (w.x0[static_cast<size_t>(j)] - nb.U_radius < lo - 1e-15 ||
            w.x0[static_cast<size_t>(j)] + nb.U_radius > hi + 1e-15)
            throw input_error("witness neighborhood leaves the box; rescale the witness "
                              "into the interior (homogeneity allows it)");
    }
    return std::pow(0.5, s.R) / w.M * std::pow(2.0 * nb.W_radius, s.n - s.R);
}

MinorBoundReport real_minor_lower_bound(const RealZeroWitness& w, const PolySystem& s,
                                        const PatchCertificates& patches) {
    double sup = 0;
    for (double v : w.x0) sup = std::max(sup, std::abs(v));
    if (std::abs(sup - 1.0) > 1e-9)
        throw input_error("real_minor_lower_bound needs |x0| = 1");

    MinorBoundReport best;
    best.measured_M = w.M;
    best.kps_log2_scale = kps_bound(s, "projective").log2_bound;
    bool found = false;
    for (int j = 0; j < s.n; ++j) {
        if (std::abs(std::abs(w.x0[static_cast<size_t>(j)]) - 1.0) > 1e-9) continue;
        if (static_cast<size_t>(j) >= patches.per_patch.size()) continue;
        const auto& cert = patches.per_patch[static_cast<size_t>(j)];
        if (!cert.has_value()) continue;
        // l1 norms of the minor cofactors bound their values on |x| <= 1
        Rat l1(0);
        for (const Poly& g : cert->cofactors_minor)
            for (const Term& t : g.terms()) l1 += Rat(abs(t.c));
        if (l1 == 0) continue;
        double bound = cert->N.get_d() / l1.get_d();
        if (!found || bound > best.bound) {
            best.bound = bound;
            best.Ntilde = cert->N;
            best.patch_j = j;
            found = true;
        }
    }
    if (!found)
        throw input_error("no patch certificate available on a chart with |x0_j| = 1");
    return best;
}

} // namespace qcm
