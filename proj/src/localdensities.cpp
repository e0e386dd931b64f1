#include "qcm/localdensities.hpp"

#include <omp.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "qcm/errors.hpp"
#include "qcm/modeval.hpp"
#include "qcm/numtheory.hpp"

namespace qcm {

namespace {

using std::int64_t;
using std::uint64_t;

Int pow_int(int64_t base, long e) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
    return r;
}

std::vector<Poly> fold_nu(const PolySystem& s, const std::vector<Int>& nu) {
    if (static_cast<int>(nu.size()) != s.R) throw input_error("nu must have length R");
    std::vector<Poly> g;
    g.reserve(static_cast<size_t>(s.R));
    for (int i = 0; i < s.R; ++i)
        g.push_back(s.polys[static_cast<size_t>(i)] - Poly::constant(s.n, nu[static_cast<size_t>(i)]));
    return g;
}

Poly reduce_coeffs(const Poly& f, const Int& m) {
    std::vector<Term> terms;
    for (const Term& t : f.terms()) {
        Int c = t.c % m;
        if (c < 0) c += m;
        if (c != 0) terms.push_back(Term{t.e, c});
    }
    return Poly(f.nvars(), terms);
}

int content_valuation(const std::vector<Poly>& g, int64_t p, int cap) {
    int v = cap;
    for (const Poly& f : g)
        for (const Term& t : f.terms()) {
            v = std::min(v, valuation(t.c, p));
            if (v == 0) return 0;
        }
    return v;
}

std::string system_key(const std::vector<Poly>& g, int N) {
    std::ostringstream os;
    os << N << "#";
    for (const Poly& f : g) {
        for (const Term& t : f.terms()) {
            for (int e : t.e) os << e << ",";
            os << ":" << t.c.get_str() << ";";
        }
        os << "|";
    }
    return os.str();
}

std::vector<Poly> minors_of(const std::vector<Poly>& g, int n, int R) {
    PolySystem scratch;
    scratch.n = n;
    scratch.R = R;
    scratch.d = 2; // unvalidated container
    scratch.polys = g;
    std::vector<Poly> out;
    for (const auto& I : column_subsets(n, R)) out.push_back(jacobian_minor(scratch, I));
    return out;
}

int max_degree(const std::vector<Poly>& polys) {
    int d = 1;
    for (const Poly& f : polys) d = std::max(d, f.total_degree());
    return d;
}

struct HenselContext {
    int64_t p;
    int n;
    int R;
    int depth_cap;
    uint64_t budget;
    uint64_t used = 0;
    Exec exec;
    std::map<std::string, Int> memo;
};

// Exact count of x mod p^N with g(x) = 0 mod p^N; the target value is folded
// into the constant terms.
Int hensel_count(std::vector<Poly> g, int N, int depth, HenselContext& ctx) {
    const int64_t p = ctx.p;
    const int n = ctx.n;
    if (N <= 0) return 1;

    // content factoring: g = p^e h constrains only h mod p^{N-e}
    for (Poly& f : g) f = reduce_coeffs(f, pow_int(p, N));
    int e = content_valuation(g, p, N);
    if (e >= N) return pow_int(p, static_cast<long>(n) * N);
    if (e > 0) {
        Int pe = pow_int(p, e);
        for (Poly& f : g) {
            std::vector<Term> terms;
            for (const Term& t : f.terms()) terms.push_back(Term{t.e, t.c / pe});
            f = Poly(f.nvars(), terms);
        }
        return pow_int(p, static_cast<long>(n) * e) * hensel_count(std::move(g), N - e, depth, ctx);
    }

    std::string key = system_key(g, N);
    auto hit = ctx.memo.find(key);
    if (hit != ctx.memo.end()) return hit->second;

    uint64_t points = 1;
    for (int j = 0; j < n; ++j) {
        if (points > (ctx.budget - std::min(ctx.budget, ctx.used)) / static_cast<uint64_t>(p))
            throw budget_error("count_mod_prime_power: enumeration budget exceeded");
        points *= static_cast<uint64_t>(p);
    }
    ctx.used += points;

    // minors of the current level; the Jacobian of a recursed subsystem is the
    // original Jacobian composed with x0 + p y, so per-level recomputation is
    // exactly the right object
    std::vector<Poly> minors = minors_of(g, n, ctx.R);
    const int maxdeg = std::max(max_degree(g), std::max(1, max_degree(minors)));

    std::vector<ModPoly> gm, mm;
    for (const Poly& f : g) gm.push_back(ModPoly::compile(f, p));
    for (const Poly& m : minors) mm.push_back(ModPoly::compile(m, p));

    uint64_t smooth_count = 0;
    std::vector<std::vector<std::vector<int64_t>>> singular_slices(static_cast<size_t>(p));

    const bool par = (ctx.exec == Exec::parallel) && points > 4096;
#pragma omp parallel for schedule(dynamic) reduction(+ : smooth_count) if (par)
    for (int64_t lead = 0; lead < p; ++lead) {
        ModTable ev(n, maxdeg, p);
        ev.set_var(0, lead);
        std::vector<int64_t> x(static_cast<size_t>(n), 0);
        x[0] = lead;
        for (int j = 1; j < n; ++j) ev.set_var(j, 0);
        auto& local_singular = singular_slices[static_cast<size_t>(lead)];
        while (true) {
            bool sol = true;
            for (const ModPoly& f : gm)
                if (ev.eval(f) != 0) {
                    sol = false;
                    break;
                }
            if (sol) {
                bool smooth = false;
                for (const ModPoly& m : mm)
                    if (ev.eval(m) != 0) {
                        smooth = true;
                        break;
                    }
                if (smooth || N == 1) ++smooth_count;
                else local_singular.push_back(x);
            }
            int j = n - 1;
            while (j >= 1) {
                if (++x[static_cast<size_t>(j)] < p) {
                    ev.set_var(j, x[static_cast<size_t>(j)]);
                    break;
                }
                x[static_cast<size_t>(j)] = 0;
                ev.set_var(j, 0);
                --j;
            }
            if (j < 1) break;
        }
    }

    Int total = (N == 1) ? Int(static_cast<unsigned long>(smooth_count))
                         : pow_int(p, static_cast<long>(n - ctx.R) * (N - 1)) *
                               static_cast<unsigned long>(smooth_count);

    if (N > 1) {
        bool any_singular = false;
        for (const auto& sl : singular_slices) any_singular |= !sl.empty();
        if (any_singular && depth + 1 > ctx.depth_cap)
            throw budget_error("count_mod_prime_power: recursion depth cap (" +
                               std::to_string(ctx.depth_cap) + ") exceeded; partial count " +
                               total.get_str() + " from the smooth stratum");
        std::vector<Int> scale(static_cast<size_t>(n), Int(p));
        std::vector<Int> shift(static_cast<size_t>(n));
        for (const auto& sl : singular_slices)
            for (const auto& x0 : sl) {
                for (int j = 0; j < n; ++j) shift[static_cast<size_t>(j)] = x0[static_cast<size_t>(j)];
                std::vector<Poly> h;
                h.reserve(g.size());
                for (const Poly& f : g) {
                    Poly sub = f.affine_substitute(scale, shift);
                    // f(x0 + p y) has content p once f(x0) = 0 mod p
                    std::vector<Term> terms;
                    for (const Term& t : sub.terms()) terms.push_back(Term{t.e, t.c / p});
                    h.push_back(Poly(n, terms));
                }
                total += hensel_count(std::move(h), N - 1, depth + 1, ctx);
            }
    }
    ctx.memo[key] = total;
    return total;
}

// split/direct histogram route when affordable
std::optional<Int> histogram_count(const PolySystem& s, int64_t q, const std::vector<Int>& nu,
                                   uint64_t budget, Exec exec) {
    uint64_t direct = 1;
    bool direct_ok = true;
    for (int j = 0; j < s.n; ++j) {
        if (direct > budget / static_cast<uint64_t>(q)) {
            direct_ok = false;
            break;
        }
        direct *= static_cast<uint64_t>(q);
    }
    if (!direct_ok) {
        auto blocks = variable_blocks(s);
        if (blocks.size() < 2) return std::nullopt;
        uint64_t conv = 1;
        for (int i = 0; i < 2 * s.R; ++i) {
            if (conv > 200'000'000ULL / static_cast<uint64_t>(q)) return std::nullopt;
            conv *= static_cast<uint64_t>(q);
        }
        uint64_t cost = 0;
        for (const auto& blk : blocks) {
            uint64_t c = 1;
            for (size_t i = 0; i < blk.size(); ++i) {
                if (c > budget / static_cast<uint64_t>(q)) return std::nullopt;
                c *= static_cast<uint64_t>(q);
            }
            cost += c;
            if (cost > budget) return std::nullopt;
        }
    }
    std::vector<uint64_t> hist = value_histogram(s, q, budget, exec);
    size_t idx = 0;
    for (int i = s.R - 1; i >= 0; --i) {
        Int r = nu[static_cast<size_t>(i)] % q;
        if (r < 0) r += q;
        idx = idx * static_cast<size_t>(q) + r.get_ui();
    }
    return Int(static_cast<unsigned long>(hist[idx]));
}

} // namespace

Int count_mod_reference(const PolySystem& s, int64_t q, const std::vector<Int>& nu,
                        uint64_t budget) {
    if (q < 1) throw input_error("modulus must be positive");
    if (static_cast<int>(nu.size()) != s.R) throw input_error("nu must have length R");
    if (q == 1) return 1;
    std::vector<uint64_t> hist = value_histogram_reference(s, q, budget);
    size_t idx = 0;
    for (int i = s.R - 1; i >= 0; --i) {
        Int r = nu[static_cast<size_t>(i)] % q;
        if (r < 0) r += q;
        idx = idx * static_cast<size_t>(q) + r.get_ui();
    }
    return Int(static_cast<unsigned long>(hist[idx]));
}

Int count_mod_prime_power_hensel(const PolySystem& s, int64_t p, int N,
                                 const std::vector<Int>& nu, uint64_t budget, Exec exec,
                                 int depth_cap) {
    if (!is_prime(p)) throw input_error("count_mod_prime_power needs a prime p");
    if (N < 1) throw input_error("need N >= 1");
    HenselContext ctx{p, s.n, s.R, depth_cap, budget, 0, exec, {}};
    return hensel_count(fold_nu(s, nu), N, 0, ctx);
}

Int count_mod_prime_power(const PolySystem& s, int64_t p, int N, const std::vector<Int>& nu,
                          uint64_t budget, Exec exec, int depth_cap) {
    if (!is_prime(p)) throw input_error("count_mod_prime_power needs a prime p");
    if (N < 1) throw input_error("need N >= 1");
    int64_t q = 1;
    bool overflow = false;
    for (int i = 0; i < N; ++i) {
        if (q > (1LL << 40) / p) {
            overflow = true;
            break;
        }
        q *= p;
    }
    if (!overflow)
        if (auto c = histogram_count(s, q, nu, std::min<uint64_t>(budget, 50'000'000ULL), exec))
            return *c;
    return count_mod_prime_power_hensel(s, p, N, nu, budget, exec, depth_cap);
}

Int count_mod(const PolySystem& s, int64_t q, const std::vector<Int>& nu, uint64_t budget,
              Exec exec) {
    if (q < 1) throw input_error("modulus must be positive");
    if (static_cast<int>(nu.size()) != s.R) throw input_error("nu must have length R");
    if (q == 1) return 1;
    Int total = 1;
    for (auto [p, k] : factorize(q)) total *= count_mod_prime_power(s, p, k, nu, budget, exec);
    return total;
}

std::optional<bool> all_solutions_smooth(const PolySystem& s, int64_t p,
                                         const std::vector<Int>& nu, uint64_t budget) {
    uint64_t points = 1;
    for (int j = 0; j < s.n; ++j) {
        if (points > budget / static_cast<uint64_t>(p)) return std::nullopt;
        points *= static_cast<uint64_t>(p);
    }
    std::vector<Poly> g = fold_nu(s, nu);
    std::vector<Poly> minors = minors_of(g, s.n, s.R);
    const int maxdeg = std::max(max_degree(g), std::max(1, max_degree(minors)));
    std::vector<ModPoly> gm, mm;
    for (const Poly& f : g) gm.push_back(ModPoly::compile(f, p));
    for (const Poly& m : minors) mm.push_back(ModPoly::compile(m, p));

    bool all_smooth = true;
#pragma omp parallel for schedule(dynamic) reduction(&& : all_smooth) if (points > 4096)
    for (int64_t lead = 0; lead < p; ++lead) {
        ModTable ev(s.n, maxdeg, p);
        ev.set_var(0, lead);
        std::vector<int64_t> x(static_cast<size_t>(s.n), 0);
        x[0] = lead;
        for (int j = 1; j < s.n; ++j) ev.set_var(j, 0);
        bool local = true;
        while (local) {
            bool sol = true;
            for (const ModPoly& f : gm)
                if (ev.eval(f) != 0) {
                    sol = false;
                    break;
                }
            if (sol) {
                bool smooth = false;
                for (const ModPoly& m : mm)
                    if (ev.eval(m) != 0) {
                        smooth = true;
                        break;
                    }
                if (!smooth) local = false;
            }
            int j = s.n - 1;
            while (j >= 1) {
                if (++x[static_cast<size_t>(j)] < p) {
                    ev.set_var(j, x[static_cast<size_t>(j)]);
                    break;
                }
                x[static_cast<size_t>(j)] = 0;
                ev.set_var(j, 0);
                --j;
            }
            if (j < 1) break;
        }
        all_smooth = all_smooth && local;
    }
    return all_smooth;
}

LocalDensity local_density(const PolySystem& s, int64_t p, int N_max,
                           const std::vector<Int>& nu, uint64_t budget, Exec exec) {
    if (N_max < 1) throw input_error("need N_max >= 1");
    LocalDensity out;
    out.p = p;
    out.nu = nu;

    auto normalized = [&](int N) -> Rat {
        Int c = count_mod_prime_power(s, p, N, nu, budget, exec);
        Rat v = Rat(c) / Rat(pow_int(p, static_cast<long>(N) * (s.n - s.R)));
        v.canonicalize();
        return v;
    };

    std::optional<bool> smooth =
        all_solutions_smooth(s, p, nu, std::min<uint64_t>(budget, 20'000'000ULL));
    if (smooth.has_value() && *smooth) {
        out.N_used = 1;
        out.value = normalized(1);
        out.stabilized = true;
        out.how = Stabilization::smooth_certified;
        return out;
    }

    Rat prev;
    for (int N = 1; N <= N_max; ++N) {
        Rat v;
        try {
            v = normalized(N);
        } catch (const budget_error&) {
            if (N == 1) throw;
            out.N_used = N - 1;
            out.value = prev;
            out.stabilized = false;
            out.how = Stabilization::unstabilized;
            return out;
        }
        if (N > 1 && v == prev) {
            out.N_used = N;
            out.value = v;
            out.stabilized = true;
            out.how = Stabilization::consecutive_agreement;
            return out;
        }
        prev = v;
    }
    out.N_used = N_max;
    out.value = prev;
    out.stabilized = false;
    out.how = Stabilization::unstabilized;
    return out;
}

void verify_witness(const PadicWitness& w, const PolySystem& s, const std::vector<Int>& nu) {
    if (static_cast<int>(w.x0.size()) != s.n) throw input_error("witness dimension mismatch");
    if (w.e < 0) throw input_error("witness valuation must be non-negative");
    Int mod = pow_int(w.p, 2L * w.e + 1);
    std::vector<Int> vals = s.evaluate(w.x0);
    for (int i = 0; i < s.R; ++i) {
        Int r = (vals[static_cast<size_t>(i)] - nu[static_cast<size_t>(i)]) % mod;
        if (r != 0) throw input_error("witness fails f(x0) = nu mod p^(2e+1)");
    }
    int vmin = -1;
    for (const auto& I : column_subsets(s.n, s.R)) {
        Int dv = jacobian_minor(s, I).eval(w.x0);
        int v = valuation(dv, w.p);
        if (v >= 0 && (vmin < 0 || v < vmin)) vmin = v;
    }
    if (vmin != w.e)
        throw input_error("witness minor valuation is " +
                          (vmin < 0 ? std::string("infinite") : std::to_string(vmin)) +
                          ", expected " + std::to_string(w.e));
}

std::optional<PadicWitness> find_padic_witness(const PolySystem& s, int64_t p,
                                               const std::vector<Int>& nu, int e_max,
                                               uint64_t budget) {
    std::vector<Poly> g = fold_nu(s, nu);
    std::vector<Poly> minors = minors_of(g, s.n, s.R);

    for (int e = 0; e <= e_max; ++e) {
        Int mod = pow_int(p, 2L * e + 1);
        if (!mod.fits_slong_p()) break;
        int64_t m = mod.get_si();
        uint64_t points = 1;
        bool feasible = true;
        for (int j = 0; j < s.n; ++j) {
            if (points > budget / static_cast<uint64_t>(m)) {
                feasible = false;
                break;
            }
            points *= static_cast<uint64_t>(m);
        }
        if (!feasible) break;

        // valuation filter works mod p^{e+1}
        int64_t pe1 = 1;
        for (int i = 0; i <= e; ++i) pe1 *= p;
        const int maxdeg = std::max(max_degree(g), std::max(1, max_degree(minors)));
        std::vector<ModPoly> gm, mm;
        for (const Poly& f : g) gm.push_back(ModPoly::compile(f, m));
        for (const Poly& mi : minors) mm.push_back(ModPoly::compile(mi, pe1));

        std::vector<std::vector<int64_t>> hits(static_cast<size_t>(m));
#pragma omp parallel for schedule(dynamic) if (points > 4096)
        for (int64_t lead = 0; lead < m; ++lead) {
            ModTable ev(s.n, maxdeg, m);
            ModTable evp(s.n, maxdeg, pe1);
            ev.set_var(0, lead);
            evp.set_var(0, lead);
            std::vector<int64_t> x(static_cast<size_t>(s.n), 0);
            x[0] = lead;
            for (int j = 1; j < s.n; ++j) {
                ev.set_var(j, 0);
                evp.set_var(j, 0);
            }
            bool found = false;
            while (!found) {
                bool sol = true;
                for (const ModPoly& f : gm)
                    if (ev.eval(f) != 0) {
                        sol = false;
                        break;
                    }
                if (sol) {
                    // min valuation == e: all minors = 0 mod p^e, some != 0 mod p^{e+1}
                    int vmin = e + 1;
                    for (const ModPoly& mi : mm) {
                        int64_t v = evp.eval(mi);
                        int val = 0;
                        if (v == 0) val = e + 1;
                        else
                            while (v % p == 0) {
                                v /= p;
                                ++val;
                            }
                        vmin = std::min(vmin, val);
                        if (vmin < e) break;
                    }
                    if (vmin == e) {
                        hits[static_cast<size_t>(lead)] = x;
                        found = true;
                        break;
                    }
                }
                int j = s.n - 1;
                while (j >= 1) {
                    if (++x[static_cast<size_t>(j)] < m) {
                        ev.set_var(j, x[static_cast<size_t>(j)]);
                        evp.set_var(j, x[static_cast<size_t>(j)]);
                        break;
                    }
                    x[static_cast<size_t>(j)] = 0;
                    ev.set_var(j, 0);
                    evp.set_var(j, 0);
                    --j;
                }
                if (j < 1) break;
            }
        }
        for (const auto& h : hits) {
            if (h.empty()) continue;
            PadicWitness w;
            w.p = p;
            w.e = e;
            for (int64_t c : h) w.x0.emplace_back(c);
            return w;
        }
    }
    return std::nullopt;
}

Rat density_lower_bound(const PadicWitness& w, const PolySystem& s,
                        const std::vector<Int>& nu) {
    verify_witness(w, s, nu);
    Rat base = Rat(1) / Rat(pow_int(w.p, 1L + 2L * w.e));
    Rat out(1);
    for (int k = 0; k < s.n - s.R; ++k) out *= base;
    out.canonicalize();
    return out;
}

MinorCheck witness_minor_check(const PadicWitness& w, const Int& N, const PolySystem& s) {
    if (N <= 0) throw input_error("certificate constant must be positive");
    verify_witness(w, s, std::vector<Int>(static_cast<size_t>(s.R), Int(0)));
    MinorCheck mc;
    mc.witness_valuation = w.e;
    mc.N_valuation = valuation(N, w.p);
    mc.ok = w.e <= mc.N_valuation;
    return mc;
}

} // namespace qcm
