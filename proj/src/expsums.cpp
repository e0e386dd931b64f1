#include "qcm/expsums.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "qcm/errors.hpp"
#include "qcm/numtheory.hpp"

namespace qcm {

namespace {

using std::int64_t;
using std::uint64_t;

constexpr double tau = 2.0 * std::numbers::pi;

std::complex<double> unit_phase(double x) {
    double f = x - std::floor(x);
    return {std::cos(tau * f), std::sin(tau * f)};
}

int64_t reduce_mod(int64_t x, int64_t q) {
    int64_t r = x % q;
    return r < 0 ? r + q : r;
}

int64_t dot_mod(const std::vector<int64_t>& a, const std::vector<int64_t>& v, int64_t q) {
    int64_t s = 0;
    for (size_t i = 0; i < a.size(); ++i)
        s = reduce_mod(s + reduce_mod(a[i], q) * reduce_mod(v[i], q) % q, q);
    return s;
}

void check_gcd(const std::vector<int64_t>& a, int64_t q) {
    int64_t g = q;
    for (int64_t ai : a) g = std::gcd(g, reduce_mod(ai, q));
    if (g != 1) throw input_error("exp_sum_complete requires gcd(a, q) = 1");
}

// S_{b, q_f} from the value histogram of one prime-power factor.
std::complex<double> factor_sum(const std::vector<uint64_t>& hist,
                                const std::vector<int64_t>& b, int64_t qf, int R) {
    // collapse to a length-qf phase histogram so the trigonometry is O(qf)
    std::vector<double> phase_weight(static_cast<size_t>(qf), 0.0);
    for (size_t idx = 0; idx < hist.size(); ++idx) {
        if (hist[idx] == 0) continue;
        size_t rest = idx;
        int64_t ph = 0;
        for (int r = 0; r < R; ++r) {
            int64_t tr = static_cast<int64_t>(rest % static_cast<size_t>(qf));
            rest /= static_cast<size_t>(qf);
            ph = reduce_mod(ph + reduce_mod(b[static_cast<size_t>(r)], qf) * tr % qf, qf);
        }
        phase_weight[static_cast<size_t>(ph)] += static_cast<double>(hist[idx]);
    }
    std::complex<double> s(0, 0);
    for (int64_t j = 0; j < qf; ++j) {
        if (phase_weight[static_cast<size_t>(j)] == 0) continue;
        s += phase_weight[static_cast<size_t>(j)] *
             unit_phase(static_cast<double>(j) / static_cast<double>(qf));
    }
    return s;
}

CycValue factor_sum_exact(const std::vector<uint64_t>& hist, const std::vector<int64_t>& b,
                          int64_t qf, int R) {
    CycValue v(qf);
    for (size_t idx = 0; idx < hist.size(); ++idx) {
        if (hist[idx] == 0) continue;
        size_t rest = idx;
        int64_t ph = 0;
        for (int r = 0; r < R; ++r) {
            int64_t tr = static_cast<int64_t>(rest % static_cast<size_t>(qf));
            rest /= static_cast<size_t>(qf);
            ph = reduce_mod(ph + reduce_mod(b[static_cast<size_t>(r)], qf) * tr % qf, qf);
        }
        v.add_root(ph, mpq_class(static_cast<unsigned long>(hist[idx])));
    }
    return v;
}

struct CrtFactor {
    int64_t qf;
    std::vector<int64_t> b; // a * (q/qf)^{-1} mod qf
};

std::vector<CrtFactor> crt_split(const std::vector<int64_t>& a, int64_t q) {
    std::vector<CrtFactor> out;
    for (auto [p, k] : factorize(q)) {
        int64_t qf = 1;
        for (int i = 0; i < k; ++i) qf *= p;
        int64_t cof = q / qf;
        int64_t u = mod_inverse(reduce_mod(cof, qf), qf);
        CrtFactor f;
        f.qf = qf;
        for (int64_t ai : a) f.b.push_back(reduce_mod(ai, qf) * u % qf);
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace

std::complex<double> exp_sum_complete(const PolySystem& s, const std::vector<int64_t>& a,
                                      int64_t q, const std::vector<int64_t>& nu,
                                      uint64_t budget, Exec exec) {
    if (q < 1) throw input_error("modulus must be positive");
    if (static_cast<int>(a.size()) != s.R || static_cast<int>(nu.size()) != s.R)
        throw input_error("a and nu must have length R");
    check_gcd(a, q);
    if (q == 1) return {1.0, 0.0};
    std::complex<double> prod(1, 0);
    for (const CrtFactor& f : crt_split(a, q)) {
        std::vector<uint64_t> hist = value_histogram(s, f.qf, budget, exec);
        prod *= factor_sum(hist, f.b, f.qf, s.R);
    }
    int64_t tw = dot_mod(a, nu, q);
    return prod * unit_phase(-static_cast<double>(tw) / static_cast<double>(q));
}

CycValue exp_sum_complete_exact(const PolySystem& s, const std::vector<int64_t>& a, int64_t q,
                                const std::vector<int64_t>& nu, uint64_t budget,
                                int64_t max_order) {
    if (q < 1) throw input_error("modulus must be positive");
    if (q > max_order)
        throw budget_error("cyclotomic mode capped at order " + std::to_string(max_order));
    if (static_cast<int>(a.size()) != s.R || static_cast<int>(nu.size()) != s.R)
        throw input_error("a and nu must have length R");
    check_gcd(a, q);
    if (q == 1) return CycValue::rational(1);
    CycValue prod = CycValue::rational(1);
    for (const CrtFactor& f : crt_split(a, q)) {
        std::vector<uint64_t> hist = value_histogram(s, f.qf, budget, Exec::parallel);
        prod = prod * factor_sum_exact(hist, f.b, f.qf, s.R);
    }
    int64_t tw = dot_mod(a, nu, q);
    return prod.twisted(q, -tw);
}

double nearest_int_distance(double x) {
    return std::abs(x - std::round(x));
}

std::complex<double> exp_sum_box(const PolySystem& s, const std::vector<double>& alpha,
                                 const std::vector<int64_t>& nu, const Rat& P, const Box& B,
                                 uint64_t budget, Exec exec) {
    if (static_cast<int>(alpha.size()) != s.R || static_cast<int>(nu.size()) != s.R)
        throw input_error("alpha and nu must have length R");
    if (B.dim() != s.n) throw input_error("box dimension mismatch");
    if (P <= 0) throw input_error("P must be positive");

    std::vector<long> lo(static_cast<size_t>(s.n)), hi(static_cast<size_t>(s.n));
    uint64_t points = 1;
    for (int j = 0; j < s.n; ++j) {
        Rat a = P * B.sides[static_cast<size_t>(j)].first;
        Rat b = P * B.sides[static_cast<size_t>(j)].second;
        lo[static_cast<size_t>(j)] = ceil_rat(a);
        hi[static_cast<size_t>(j)] = floor_rat(b);
        long w = hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)] + 1;
        if (w <= 0) return {0.0, 0.0};
        if (points > budget / static_cast<uint64_t>(w))
            throw budget_error("exp_sum_box: lattice point count exceeds budget");
        points *= static_cast<uint64_t>(w);
    }

    const long lead_lo = lo[0], lead_hi = hi[0];
    const long slices = lead_hi - lead_lo + 1;
    std::vector<std::complex<double>> slice_sum(static_cast<size_t>(slices), {0, 0});

    double nu_shift = 0;
    for (int i = 0; i < s.R; ++i)
        nu_shift += alpha[static_cast<size_t>(i)] * static_cast<double>(nu[static_cast<size_t>(i)]);

    const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(dynamic) if (par)
    for (long sl = 0; sl < slices; ++sl) {
        std::vector<Int> x(static_cast<size_t>(s.n));
        std::vector<long> xi(static_cast<size_t>(s.n));
        xi[0] = lead_lo + sl;
        for (int j = 1; j < s.n; ++j) xi[static_cast<size_t>(j)] = lo[static_cast<size_t>(j)];
        double sre = 0, cre = 0, sim = 0, cim = 0; // Kahan within the slice
        while (true) {
            for (int j = 0; j < s.n; ++j) x[static_cast<size_t>(j)] = xi[static_cast<size_t>(j)];
            double phase = -nu_shift;
            for (int i = 0; i < s.R; ++i)
                phase += alpha[static_cast<size_t>(i)] * s.polys[static_cast<size_t>(i)].eval(x).get_d();
            std::complex<double> e = unit_phase(phase);
            double y = e.real() - cre, t = sre + y;
            cre = (t - sre) - y;
            sre = t;
            y = e.imag() - cim;
            t = sim + y;
            cim = (t - sim) - y;
            sim = t;
            int j = s.n - 1;
            while (j >= 1) {
                if (++xi[static_cast<size_t>(j)] <= hi[static_cast<size_t>(j)]) break;
                xi[static_cast<size_t>(j)] = lo[static_cast<size_t>(j)];
                --j;
            }
            if (j < 1) break;
        }
        slice_sum[static_cast<size_t>(sl)] = {sre, sim};
    }

    // ordered reduction: result independent of thread count
    double sre = 0, cre = 0, sim = 0, cim = 0;
    for (const auto& v : slice_sum) {
        double y = v.real() - cre, t = sre + y;
        cre = (t - sre) - y;
        sre = t;
        y = v.imag() - cim;
        t = sim + y;
        cim = (t - sim) - y;
        sim = t;
    }
    return {sre, sim};
}

uint64_t weyl_count(const PolySystem& s, const std::vector<double>& alpha, double xi,
                    double eta, double P, uint64_t budget, Exec exec) {
    if (static_cast<int>(alpha.size()) != s.R) throw input_error("alpha must have length R");
    const int d = s.d, n = s.n;
    const int64_t H = static_cast<int64_t>(std::floor(std::pow(P, xi)));
    const double eps = std::pow(P, -eta);
    const int vecs = d - 1;
    const int coords = n * vecs;
    const int64_t side = 2 * H + 1;

    uint64_t total_tuples = 1;
    for (int c = 0; c < coords; ++c) {
        if (total_tuples > budget / static_cast<uint64_t>(side))
            throw budget_error("weyl_count: tuple count exceeds budget");
        total_tuples *= static_cast<uint64_t>(side);
    }

    PolySystem tilde = top_degree_part(s);
    std::vector<std::vector<Poly>> partials(static_cast<size_t>(s.R));
    for (int i = 0; i < s.R; ++i)
        for (int j = 0; j < n; ++j)
            partials[static_cast<size_t>(i)].push_back(
                tilde.polys[static_cast<size_t>(i)].derivative(j));

    uint64_t count = 0;
    const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : count) if (par)
    for (int64_t lead = -H; lead <= H; ++lead) {
        std::vector<int64_t> flat(static_cast<size_t>(coords), -H);
        flat[0] = lead;
        std::vector<std::vector<Int>> tuple(static_cast<size_t>(vecs),
                                            std::vector<Int>(static_cast<size_t>(n)));
        std::vector<Int> sum(static_cast<size_t>(n));
        while (true) {
            for (int v = 0; v < vecs; ++v)
                for (int j = 0; j < n; ++j)
                    tuple[static_cast<size_t>(v)][static_cast<size_t>(j)] =
                        flat[static_cast<size_t>(v * n + j)];
            bool ok = true;
            for (int j = 0; j < n && ok; ++j) {
                double form = 0;
                for (int i = 0; i < s.R; ++i) {
                    // Gamma_i(e_j, ...) = polarization of the j-th partial
                    const Poly& hj = partials[static_cast<size_t>(i)][static_cast<size_t>(j)];
                    Int gamma = 0;
                    for (unsigned mask = 1; mask < (1u << vecs); ++mask) {
                        for (int jj = 0; jj < n; ++jj) sum[static_cast<size_t>(jj)] = 0;
                        int bits = 0;
                        for (int v = 0; v < vecs; ++v) {
                            if (!(mask >> v & 1)) continue;
                            ++bits;
                            for (int jj = 0; jj < n; ++jj)
                                sum[static_cast<size_t>(jj)] +=
                                    tuple[static_cast<size_t>(v)][static_cast<size_t>(jj)];
                        }
                        Int val = hj.eval(sum);
                        gamma += ((vecs - bits) % 2 == 0) ? val : -val;
                    }
                    form += alpha[static_cast<size_t>(i)] * gamma.get_d();
                }
                if (!(nearest_int_distance(form) < eps)) ok = false;
            }
            if (ok) ++count;
            int c = coords - 1;
            while (c >= 1) {
                if (++flat[static_cast<size_t>(c)] <= H) break;
                flat[static_cast<size_t>(c)] = -H;
                --c;
            }
            if (c < 1) break;
        }
    }
    return count;
}

RationalApproxResult rational_approx(const std::vector<double>& alpha, double theta, double P,
                                     const Int& Ctilde, int R, int d) {
    for (double a : alpha)
        if (a < 0 || a >= 1) throw input_error("rational_approx expects alpha in [0,1)^R");
    RationalApproxResult res;
    const double Ct = Ctilde.get_d();
    res.q_bound = std::pow(Ct, R) * std::pow(P, R * (d - 1) * theta);
    res.width = std::pow(Ct, R - 1) * std::pow(P, -d + R * (d - 1) * theta);

    auto admissible = [&](int64_t q) -> std::optional<RationalApprox> {
        RationalApprox ra;
        ra.q = q;
        int64_t g = q;
        for (double ai : alpha) {
            int64_t num = llround(static_cast<double>(q) * ai);
            if (std::abs(static_cast<double>(q) * ai - static_cast<double>(num)) > res.width)
                return std::nullopt;
            ra.a.push_back(num);
            g = std::gcd(g, num);
        }
        if (g != 1) return std::nullopt;
        return ra;
    };

    if (res.q_bound <= 1.0e6) {
        int64_t qmax = static_cast<int64_t>(std::floor(res.q_bound * (1 + 1e-12)));
        for (int64_t q = 1; q <= qmax; ++q) {
            if (auto ra = admissible(q)) {
                res.approx = *ra;
                return res;
            }
        }
        res.certified_absence = true;
        return res;
    }

    // candidate denominators from continued-fraction convergents plus a small
    // exhaustive prefix; absence is not certified on this path
    std::set<int64_t> candidates;
    for (int64_t q = 1; q <= 10000; ++q) candidates.insert(q);
    for (double ai : alpha) {
        double x = ai;
        int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
        for (int it = 0; it < 60; ++it) {
            int64_t a0 = static_cast<int64_t>(std::floor(x));
            int64_t h2 = a0 * h1 + h0, k2 = a0 * k1 + k0;
            if (static_cast<double>(k2) > res.q_bound || k2 <= 0) break;
            if (k2 >= 1) candidates.insert(k2);
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            double frac = x - static_cast<double>(a0);
            if (frac < 1e-15) break;
            x = 1.0 / frac;
        }
    }
    for (int64_t q : candidates) {
        if (static_cast<double>(q) > res.q_bound) break;
        if (auto ra = admissible(q)) {
            res.approx = *ra;
            return res;
        }
    }
    res.certified_absence = false;
    return res;
}

ArcDecomposition arc_decomposition(const Rat& theta, double P, const Int& Ctilde, int R, int d,
                                   uint64_t max_arcs, uint64_t list_cap) {
    if (theta <= 0 || theta > 1) throw input_error("theta must lie in (0, 1]");
    if (P <= 1) throw input_error("P must exceed 1");
    ArcDecomposition out;
    out.theta = theta;
    out.P = P;
    out.Ctilde = Ctilde;
    out.R = R;
    out.d = d;

    const double th = theta.get_d();
    const double Ct = Ctilde.get_d();
    out.q_bound = std::pow(Ct, R) * std::pow(P, R * (d - 1) * th);
    out.q_max = static_cast<int64_t>(std::floor(out.q_bound * (1 + 1e-12)));
    out.width_unit = std::pow(Ct, R - 1) * std::pow(P, -d + R * (d - 1) * th);
    out.lemma_vol_reference =
        std::pow(Ct, R * R) * std::pow(P, -R * d + R * (R + 1) * (d - 1) * th);

    // lemma criterion: d > 2R(d-1)theta + (2R-1) log_P(Ctilde)
    double crit = 2.0 * R * (d - 1) * th + (2.0 * R - 1.0) * std::log(Ct) / std::log(P);
    out.disjoint = static_cast<double>(d) > crit;

    out.q_sum = Rat(0);
    out.arc_count = 0;
    for (int64_t q = 1; q <= out.q_max; ++q) {
        mpz_class jr = jordan_totient(q, R);
        out.arc_count += jr.get_ui();
        if (out.arc_count > max_arcs)
            throw budget_error("arc_decomposition: arc count exceeds budget");
        Rat denom(1);
        for (int i = 0; i < R; ++i) denom *= Rat(static_cast<long>(q));
        out.q_sum += Rat(jr) / denom;
    }
    out.q_sum.canonicalize();
    double widthR = std::pow(out.width_unit, R);
    if (out.disjoint) {
        out.total_volume = widthR * out.q_sum.get_d();
        out.volume_is_upper_bound = false;
    } else if (R == 1) {
        // interval union sweep mod 1
        std::vector<std::pair<double, double>> iv;
        for (int64_t q = 1; q <= out.q_max; ++q)
            for (int64_t a = 1; a <= q; ++a) {
                if (std::gcd(a, q) != 1) continue;
                double c = static_cast<double>(a) / static_cast<double>(q);
                double h = out.width_unit / (2.0 * static_cast<double>(q));
                double lo = c - h, hi = c + h;
                if (lo < 0) {
                    iv.push_back({lo + 1, 1.0});
                    lo = 0;
                }
                if (hi > 1) {
                    iv.push_back({0.0, hi - 1});
                    hi = 1;
                }
                iv.push_back({lo, hi});
            }
        std::sort(iv.begin(), iv.end());
        double vol = 0, cur_lo = 0, cur_hi = -1;
        bool open = false;
        for (auto& [lo, hi] : iv) {
            if (!open) {
                cur_lo = lo;
                cur_hi = hi;
                open = true;
            } else if (lo > cur_hi) {
                vol += cur_hi - cur_lo;
                cur_lo = lo;
                cur_hi = hi;
            } else {
                cur_hi = std::max(cur_hi, hi);
            }
        }
        if (open) vol += cur_hi - cur_lo;
        out.total_volume = vol;
        out.volume_is_upper_bound = false;
    } else {
        out.total_volume = widthR * out.q_sum.get_d();
        out.volume_is_upper_bound = true;
    }

    if (out.arc_count <= list_cap) {
        std::vector<int64_t> a(static_cast<size_t>(R), 1);
        for (int64_t q = 1; q <= out.q_max; ++q) {
            std::fill(a.begin(), a.end(), 1);
            while (true) {
                int64_t g = q;
                for (int64_t ai : a) g = std::gcd(g, ai);
                if (g == 1) out.arcs.push_back(Arc{a, q});
                int i = 0;
                while (i < R && a[static_cast<size_t>(i)] == q) a[static_cast<size_t>(i++)] = 1;
                if (i == R) break;
                ++a[static_cast<size_t>(i)];
            }
        }
    }
    return out;
}

SlidingScale sliding_scale(const BirchParams& params, const Rat& epsilon) {
    if (epsilon <= 0) throw input_error("epsilon must be positive");
    SlidingScale sc;
    sc.epsilon = epsilon;
    sc.delta = params.delta;
    const long R = params.R, d = params.d;
    Rat theta_T = Rat(2 * d) / Rat((R + 1) * (d - 1));
    theta_T.canonicalize();
    Rat theta0 = params.theta0;
    if (theta0 >= theta_T) throw input_error("sliding scale needs theta_0 < theta_T");
    Rat max_step = epsilon * params.delta / Rat(R * (R + 1) * (d - 1));
    Rat span = theta_T - theta0;
    long T = floor_rat(span / max_step) + 1; // smallest T with span/T < max_step
    sc.T = static_cast<int>(T);
    Rat step = span / Rat(T);
    for (long t = 0; t <= T; ++t) {
        Rat th = theta0 + step * Rat(t);
        th.canonicalize();
        sc.thetas.push_back(th);
    }
    return sc;
}

} // namespace qcm
