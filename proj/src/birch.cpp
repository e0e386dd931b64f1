#include "qcm/birch.hpp"

#include <cmath>
#include <random>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

double log2_int_d(const Int& x) {
    signed long exp2;
    double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp2);
}

Int pow_int(Int base, int e) {
    Int r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

} // namespace

int rational_rank(std::vector<std::vector<Rat>> m) {
    if (m.empty()) return 0;
    const size_t rows = m.size(), cols = m[0].size();
    size_t rank = 0;
    for (size_t c = 0; c < cols && rank < rows; ++c) {
        size_t pivot = rank;
        while (pivot < rows && m[pivot][c] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[rank], m[pivot]);
        for (size_t r = rank + 1; r < rows; ++r) {
            if (m[r][c] == 0) continue;
            Rat factor = m[r][c] / m[rank][c];
            for (size_t cc = c; cc < cols; ++cc) m[r][cc] -= factor * m[rank][cc];
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

namespace {

// Integer Hessian of a quadratic form (constant matrix of second partials).
std::vector<std::vector<Int>> hessian_matrix(const Poly& f, int n) {
    std::vector<std::vector<Int>> h(static_cast<size_t>(n), std::vector<Int>(static_cast<size_t>(n), Int(0)));
    for (int j = 0; j < n; ++j) {
        Poly dj = f.derivative(j);
        for (int k = 0; k < n; ++k) {
            Poly djk = dj.derivative(k);
            if (!djk.is_zero()) h[static_cast<size_t>(j)][static_cast<size_t>(k)] = djk.terms()[0].c;
        }
    }
    return h;
}

int pencil_rank(const std::vector<std::vector<std::vector<Int>>>& hessians,
                const std::vector<long>& b, int n) {
    std::vector<std::vector<Rat>> m(static_cast<size_t>(n), std::vector<Rat>(static_cast<size_t>(n), Rat(0)));
    for (size_t i = 0; i < hessians.size(); ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                m[static_cast<size_t>(j)][static_cast<size_t>(k)] +=
                    Rat(b[i]) * Rat(hessians[i][static_cast<size_t>(j)][static_cast<size_t>(k)]);
    return rational_rank(std::move(m));
}

DeltaEstimate delta_quadratic(const PolySystem& s, unsigned seed) {
    PolySystem tilde = top_degree_part(s);
    std::vector<std::vector<std::vector<Int>>> hessians;
    for (const Poly& f : tilde.polys) hessians.push_back(hessian_matrix(f, s.n));

    DeltaEstimate est;
    est.provenance = DeltaProvenance::exact_quadratic;
    if (s.R == 1) {
        // scaling b does not change the kernel: one exact rank suffices
        est.Delta = s.n - pencil_rank(hessians, {1}, s.n);
        est.certified = true;
        return est;
    }
    // R >= 2: exhaustive small box plus random probes; a rank can only dip on
    // special b we may miss, so this is an estimate and flagged as such.
    int min_rank = s.n;
    const long beta = 3;
    std::vector<long> b(static_cast<size_t>(s.R), -beta);
    while (true) {
        bool nonzero = false;
        for (long bi : b) nonzero |= (bi != 0);
        if (nonzero) min_rank = std::min(min_rank, pencil_rank(hessians, b, s.n));
        int i = 0;
        while (i < s.R && b[static_cast<size_t>(i)] == beta) b[static_cast<size_t>(i++)] = -beta;
        if (i == s.R) break;
        ++b[static_cast<size_t>(i)];
    }
    std::mt19937 rng(seed);
    std::uniform_int_distribution<long> dist(-1000, 1000);
    for (int probe = 0; probe < 32; ++probe) {
        std::vector<long> rb(static_cast<size_t>(s.R));
        bool nonzero = false;
        for (auto& x : rb) {
            x = dist(rng);
            nonzero |= (x != 0);
        }
        if (nonzero) min_rank = std::min(min_rank, pencil_rank(hessians, rb, s.n));
    }
    est.Delta = s.n - min_rank;
    est.certified = false;
    return est;
}

// Numeric search for nonzero points of Sing(ftilde_b) on the unit sphere.
// Homogeneity means any nonzero singular point sweeps out a cone, so failing
// to find one supports Delta = 0.
DeltaEstimate delta_numeric(const PolySystem& s, unsigned seed) {
    PolySystem tilde = top_degree_part(s);
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<long> bdist(-3, 3);

    DeltaEstimate est;
    est.provenance = DeltaProvenance::monte_carlo;
    est.certified = false;
    long best = 0;

    const int n = s.n;
    auto grad_sq = [&](const std::vector<Poly>& grads, const std::vector<double>& x) {
        double v = 0;
        for (const Poly& g : grads) {
            double gx = g.eval(x);
            v += gx * gx;
        }
        return v;
    };

    for (int trial = 0; trial < 24; ++trial) {
        std::vector<long> b(static_cast<size_t>(s.R), 0);
        if (s.R == 1) b[0] = 1;
        else {
            bool nonzero = false;
            while (!nonzero)
                for (auto& bi : b) {
                    bi = bdist(rng);
                    nonzero |= (bi != 0);
                }
        }
        Poly fb(n);
        for (int i = 0; i < s.R; ++i) fb = fb + tilde.polys[static_cast<size_t>(i)] * Int(b[static_cast<size_t>(i)]);
        if (fb.is_zero()) continue;
        std::vector<Poly> grads;
        for (int j = 0; j < n; ++j) grads.push_back(fb.derivative(j));

        // projected gradient descent for |grad fb|^2 on the sphere
        std::vector<double> x(static_cast<size_t>(n));
        double norm = 0;
        for (auto& xi : x) {
            xi = gauss(rng);
            norm += xi * xi;
        }
        norm = std::sqrt(norm);
        for (auto& xi : x) xi /= norm;
        double step = 0.05;
        double val = grad_sq(grads, x);
        for (int it = 0; it < 400; ++it) {
            std::vector<double> g(static_cast<size_t>(n), 0.0);
            const double h = 1e-6;
            for (int j = 0; j < n; ++j) {
                std::vector<double> xp = x;
                xp[static_cast<size_t>(j)] += h;
                g[static_cast<size_t>(j)] = (grad_sq(grads, xp) - val) / h;
            }
            std::vector<double> xn = x;
            double nn = 0;
            for (int j = 0; j < n; ++j) nn += (xn[static_cast<size_t>(j)] -= step * g[static_cast<size_t>(j)],
                                               xn[static_cast<size_t>(j)] * xn[static_cast<size_t>(j)]);
            nn = std::sqrt(nn);
            for (auto& xi : xn) xi /= nn;
            double vn = grad_sq(grads, xn);
            if (vn < val) {
                x = xn;
                val = vn;
                step *= 1.2;
            } else {
                step *= 0.5;
                if (step < 1e-14) break;
            }
        }
        if (val < 1e-16) {
            // nonzero singular point found: estimate the stratum dimension
            // from the numeric rank of the Hessian of fb at x
            std::vector<std::vector<double>> hess(static_cast<size_t>(n),
                                                  std::vector<double>(static_cast<size_t>(n)));
            for (int j = 0; j < n; ++j) {
                Poly dj = fb.derivative(j);
                for (int k = 0; k < n; ++k) hess[static_cast<size_t>(j)][static_cast<size_t>(k)] =
                    dj.derivative(k).eval(x);
            }
            // numeric rank by Gaussian elimination with partial pivoting
            int rank = 0;
            double scale = 0;
            for (auto& row : hess)
                for (double vjk : row) scale = std::max(scale, std::abs(vjk));
            if (scale > 0) {
                const double tol = 1e-8 * scale;
                size_t rr = 0;
                for (int c = 0; c < n && rr < static_cast<size_t>(n); ++c) {
                    size_t pivot = rr;
                    for (size_t r = rr + 1; r < static_cast<size_t>(n); ++r)
                        if (std::abs(hess[r][static_cast<size_t>(c)]) >
                            std::abs(hess[pivot][static_cast<size_t>(c)]))
                            pivot = r;
                    if (std::abs(hess[pivot][static_cast<size_t>(c)]) < tol) continue;
                    std::swap(hess[rr], hess[pivot]);
                    for (size_t r = rr + 1; r < static_cast<size_t>(n); ++r) {
                        double f = hess[r][static_cast<size_t>(c)] / hess[rr][static_cast<size_t>(c)];
                        for (int cc = c; cc < n; ++cc) hess[r][static_cast<size_t>(cc)] -= f * hess[rr][static_cast<size_t>(cc)];
                    }
                    ++rr;
                }
                rank = static_cast<int>(rr);
            }
            best = std::max(best, static_cast<long>(n - rank));
        }
    }
    est.Delta = best;
    return est;
}

} // namespace

DeltaEstimate delta_quantity(const PolySystem& s, const std::string& mode, long user_delta,
                             unsigned seed) {
    if (mode == "exact-quadratic") {
        if (s.d != 2) throw input_error("exact-quadratic delta mode requires d = 2");
        return delta_quadratic(s, seed);
    }
    if (mode == "monte-carlo") {
        if (s.d == 2) return delta_quadratic(s, seed);
        return delta_numeric(s, seed);
    }
    if (mode == "user") {
        DeltaEstimate est;
        est.Delta = user_delta;
        est.provenance = DeltaProvenance::user;
        est.certified = false;
        return est;
    }
    throw input_error("unknown delta mode: " + mode);
}

Rat BirchParams::hypothesis_margin() const {
    return K - Rat(static_cast<long>(R) * (R + 1) * (d - 1));
}

double BirchParams::min_admissible_P(const Int& Ctilde) const {
    if (Ctilde <= 1) return 1.0;
    double log2C = log2_int_d(Ctilde);
    double e = eta.get_d();
    return std::exp2(log2C * static_cast<double>(R) / (1.0 - e));
}

BirchParams birch_params(const PolySystem& s, long Delta, DeltaProvenance provenance) {
    BirchParams p;
    p.n = s.n;
    p.R = s.R;
    p.d = s.d;
    p.Delta = Delta;
    p.provenance = provenance;
    p.K = Rat(s.n - Delta) / Rat(pow_int(2, s.d - 1));
    Rat A(static_cast<long>(s.R) * (s.R + 1) * (s.d - 1));
    if (p.K <= A)
        throw refusal_error("hypothesis K > R(R+1)(d-1) fails: K = " +
                            p.K.get_str() + ", R(R+1)(d-1) = " + A.get_str());
    Rat Rd1(static_cast<long>(s.R) * (s.d - 1));
    Rat ratio = p.K / Rd1; // K / (R(d-1))
    p.eta = Rat(1) / (ratio + Rat(s.R + 1));
    p.theta0 = p.eta / Rd1;
    p.delta = Rat(999999, 1000000) * (ratio - Rat(s.R + 1)) * p.eta;
    p.delta.canonicalize();
    p.eta.canonicalize();
    p.theta0.canonicalize();
    p.K.canonicalize();
    return p;
}

namespace {

Rat main_exponent(const BirchParams& p, const Rat& lead) {
    Rat A(static_cast<long>(p.R) * (p.R + 1) * (p.d - 1));
    Int rdn = pow_int(Int(static_cast<long>(p.R) * p.d), p.n);
    Rat e = lead * Rat(Int(p.n) * Int(p.n) * Int(p.n)) * Rat(p.R) * Rat(rdn);
    e *= (p.K + A) / (p.K - A);
    e.canonicalize();
    return e;
}

} // namespace

BoundReport bound_main1(const BirchParams& p, const Int& C, const Int& Ctilde) {
    if (C < 1 || Ctilde < 1) throw input_error("heights must be >= 1");
    BoundReport r;
    r.theorem = "main1";
    r.exponent = main_exponent(p, Rat(4));
    r.C = C;
    r.Ctilde = Ctilde;
    r.M_sup = 1;
    r.log2_P = r.exponent.get_d() * (3.0 * log2_int_d(C) + 2.0 * log2_int_d(Ctilde));
    return r;
}

BoundReport bound_main2(const BirchParams& p, const Int& Ctilde, bool homogeneous) {
    if (!homogeneous) throw input_error("bound_main2 requires a homogeneous system");
    if (Ctilde < 1) throw input_error("heights must be >= 1");
    BoundReport r;
    r.theorem = "main2";
    r.exponent = main_exponent(p, Rat(12));
    r.C = Ctilde;
    r.Ctilde = Ctilde;
    r.M_sup = 1;
    r.log2_P = r.exponent.get_d() * log2_int_d(Ctilde);
    return r;
}

BoundReport bound_cormain(const BirchParams& p, const Int& C, const Int& Ctilde,
                          const std::vector<Int>& Mvec) {
    Int Msup = 1;
    for (const Int& Mi : Mvec) {
        if (Mi < 1) throw input_error("need M_i >= 1");
        Msup = std::max(Msup, Mi);
    }
    BoundReport r;
    r.theorem = "cormain";
    r.exponent = main_exponent(p, Rat(4));
    r.C = C;
    r.Ctilde = Ctilde;
    r.M_sup = Msup;
    r.log2_P = r.exponent.get_d() * (5.0 * p.d * log2_int_d(Msup) +
                                     3.0 * log2_int_d(C) + 2.0 * log2_int_d(Ctilde));
    return r;
}

} // namespace qcm
