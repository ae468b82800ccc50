#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "tlbethe/coefficients.hpp"
#include "tlbethe/monodromy.hpp"

namespace tlbethe {

// ---------------------------------------------------------------------------
// rapidity admissibility
// ---------------------------------------------------------------------------

// Evaluation points must stay away from the poles of the exchange weights and
// from the degenerations of the creation blocks.
inline bool rapidities_admissible(const std::vector<cd>& us, const ModelParams& p,
                                  double guard = 1e-6, std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    const int M = static_cast<int>(us.size());
    for (int i = 0; i < M; ++i) {
        cd u = us[i];
        if (std::abs(u) < guard) return fail("rapidity too close to 0");
        if (std::abs(u - 1.0) < guard || std::abs(u + 1.0) < guard)
            return fail("rapidity too close to +-1");
        if (std::abs(omega(p.q * u * u)) < guard) return fail("omega(q*u^2) too small");
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            if (std::abs(omega(us[i] / us[j])) < guard) return fail("omega(u_i/u_j) too small");
            if (std::abs(omega(p.q * us[i] * us[j])) < guard)
                return fail("omega(q*u_i*u_j) too small");
            if (std::abs(omega(us[i] * us[j])) < guard) return fail("omega(u_i*u_j) too small");
        }
    }
    return true;
}

inline void require_admissible(const std::vector<cd>& us, const ModelParams& p,
                               double guard = 1e-6) {
    std::string why;
    if (!rapidities_admissible(us, p, guard, &why)) throw SingularParameter(why);
}

// ---------------------------------------------------------------------------
// block cache and operator strings
// ---------------------------------------------------------------------------
class BlockCache {
public:
    explicit BlockCache(const ModelParams& p) : p_(p) {}

    const DoubleRowBlocks& at(cd u) {
        auto key = std::make_pair(u.real(), u.imag());
        auto it = store_.find(key);
        if (it == store_.end()) it = store_.emplace(key, build_blocks(u, p_)).first;
        return it->second;
    }

    // uncontracted rows, enough for anything that only acts on vectors
    const RowPair& rows(cd u) {
        auto key = std::make_pair(u.real(), u.imag());
        auto it = rows_.find(key);
        if (it == rows_.end()) it = rows_.emplace(key, build_row_pair(u, p_)).first;
        return it->second;
    }

    void drop(cd u) {
        auto key = std::make_pair(u.real(), u.imag());
        store_.erase(key);
        rows_.erase(key);
    }

    const ModelParams& params() const { return p_; }

private:
    ModelParams p_;
    std::map<std::pair<double, double>, DoubleRowBlocks> store_;
    std::map<std::pair<double, double>, RowPair> rows_;
};

// B(u_1) ... B(u_M) |0>
inline Vec bethe_vector(const std::vector<cd>& us, BlockCache& cache) {
    Vec v = reference_state(cache.params());
    for (auto it = us.rbegin(); it != us.rend(); ++it)
        v = apply_u_entry(cache.rows(*it), 0, 2, v);
    return v;
}

// <0| C(u_M) ... C(u_1)
inline RowVec dual_bethe_vector(const std::vector<cd>& us, BlockCache& cache) {
    RowVec v = reference_state(cache.params()).transpose();
    for (auto it = us.rbegin(); it != us.rend(); ++it)
        v = apply_u_entry_left(cache.rows(*it), 2, 0, v);
    return v;
}

// ---------------------------------------------------------------------------
// eigenvalue and Bethe equations
// ---------------------------------------------------------------------------

// candidate transfer eigenvalue attached to a rapidity set
template <class T>
T transfer_eigenvalue_t(const T& v, const std::vector<T>& us, const ModelParams& p) {
    T t1 = coeff::a(v, p) * coeff::lambda1(v, p);
    T t2 = coeff::d(v, p) * coeff::lambda2(v, p);
    for (const T& u : us) {
        t1 = t1 * coeff::f(v, u, p);
        t2 = t2 * coeff::h(v, u, p);
    }
    return t1 + t2;
}

inline cd transfer_eigenvalue(cd v, const std::vector<cd>& us, const ModelParams& p) {
    return transfer_eigenvalue_t(v, us, p);
}

// i-th Bethe equation in residual form; the set solves the system when all
// components vanish.
template <class T>
T bethe_component_t(const std::vector<T>& us, int i, const ModelParams& p) {
    const int M = static_cast<int>(us.size());
    T t1 = coeff::lambda1(us[i], p);
    T t2 = coeff::lambda2(us[i], p);
    for (int j = 0; j < M; ++j) {
        if (j == i) continue;
        t1 = t1 * coeff::f(us[i], us[j], p);
        t2 = t2 * coeff::h(us[i], us[j], p);
    }
    return t1 - t2;
}

inline cd bethe_component(const std::vector<cd>& us, int i, const ModelParams& p) {
    return bethe_component_t(us, i, p);
}

// natural magnitude of the Bethe system at this point
inline double bethe_scale(const std::vector<cd>& us, const ModelParams& p) {
    double s = 1.0;
    for (cd u : us) s = std::max(s, std::abs(coeff::lambda1(u, p)));
    return s;
}

inline double bethe_residual(const std::vector<cd>& us, const ModelParams& p) {
    double r = 0.0;
    for (int i = 0; i < static_cast<int>(us.size()); ++i)
        r = std::max(r, std::abs(bethe_component(us, i, p)));
    return r / bethe_scale(us, p);
}

// ---------------------------------------------------------------------------
// Newton iteration with dual-number Jacobian
// ---------------------------------------------------------------------------
struct NewtonOptions {
    int max_iterations = 60;
    double tol = 1e-13;
    double min_modulus = 1e-6;
    double max_modulus = 1e6;
};

inline std::optional<std::vector<cd>> newton_refine(std::vector<cd> us, const ModelParams& p,
                                                    NewtonOptions opt = {}) {
    const int M = static_cast<int>(us.size());
    if (M == 0) return us;
    for (int it = 0; it < opt.max_iterations; ++it) {
        Vec F(M);
        double scale;
        Mat J(M, M);
        try {
            for (int i = 0; i < M; ++i) F(i) = bethe_component(us, i, p);
            scale = bethe_scale(us, p);
            for (int k = 0; k < M; ++k) {
                std::vector<Jet> usj;
                usj.reserve(M);
                for (int j = 0; j < M; ++j)
                    usj.push_back(j == k ? Jet::variable(us[j]) : Jet(us[j]));
                for (int i = 0; i < M; ++i) J(i, k) = bethe_component_t(usj, i, p).b;
            }
        } catch (const SingularParameter&) {
            return std::nullopt;  // iterate drifted onto a pole
        }
        if (F.norm() < opt.tol * scale) return us;
        Eigen::PartialPivLU<Mat> lu(J);
        Vec du = lu.solve(F);
        if (!du.allFinite()) return std::nullopt;
        for (int i = 0; i < M; ++i) {
            us[i] -= du(i);
            double m = std::abs(us[i]);
            if (m < opt.min_modulus || m > opt.max_modulus) return std::nullopt;
        }
    }
    return std::nullopt;
}

// Roots are kept only when safely away from every degeneration the exchange
// relations divide by.
inline bool roots_regular(const std::vector<cd>& us, const ModelParams& p,
                          double guard = 1e-8) {
    const int M = static_cast<int>(us.size());
    for (int i = 0; i < M; ++i) {
        cd u = us[i];
        if (std::abs(omega(p.q * u * u)) < guard) return false;
        if (std::abs(omega(u * u)) < guard) return false;
        for (int j = 0; j < i; ++j) {
            if (std::abs(u * u - us[j] * us[j]) < guard) return false;
            if (std::abs(omega(us[i] / us[j])) < guard) return false;
            if (std::abs(omega(p.q * us[i] * us[j])) < guard) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// multi-start solver
// ---------------------------------------------------------------------------
struct BetheSolution {
    std::vector<cd> roots;
    double equation_residual = 0.0;   // worst Bethe component over the scale
    double vector_norm_ratio = 0.0;   // |psi| against the product of block norms
    double eigen_residual = 0.0;      // |t(v0) psi - Lambda psi| at the probe
};

struct SolveReport {
    std::vector<BetheSolution> solutions;  // physical, deduplicated
    int seeds = 0;
    int converged = 0;   // Newton successes before dedup
    int spurious = 0;    // deduplicated candidates rejected by the filters
    cd probe;            // where the eigen filter was evaluated
};

namespace detail {

inline bool same_root_set(const std::vector<cd>& a, const std::vector<cd>& b, double tol) {
    // creation blocks are even in the rapidity, so compare squared multisets
    if (a.size() != b.size()) return false;
    std::vector<cd> bs;
    bs.reserve(b.size());
    for (cd x : b) bs.push_back(x * x);
    for (cd x : a) {
        cd xx = x * x;
        auto it = std::min_element(bs.begin(), bs.end(), [&](cd l, cd r) {
            return std::abs(l - xx) < std::abs(r - xx);
        });
        if (it == bs.end() || std::abs(*it - xx) > tol) return false;
        bs.erase(it);
    }
    return true;
}

}  // namespace detail

// Multi-start Newton search for M-string solutions. Candidates are
// deduplicated on the squared-rapidity multiset, then screened: the assembled
// vector must not collapse, and it must actually reproduce its eigenvalue on
// a probe transfer matrix. Root families living on the pole manifolds solve
// the equations formally but fail both screens.
inline SolveReport solve_bethe(int M, const ModelParams& p, int nseeds = 200,
                               double dedup_tol = 1e-8) {
    SolveReport rep;
    rep.seeds = nseeds;
    Rng rng(p.rng_seed, "solve-bethe-M" + std::to_string(M) + "-N" + std::to_string(p.N));
    rep.probe = cd(0.9) * std::exp(cd(0.0, 0.3));

    if (M == 0) {
        BetheSolution empty;
        empty.vector_norm_ratio = 1.0;
        rep.solutions.push_back(empty);
        rep.converged = 1;
        return rep;
    }

    std::vector<std::vector<cd>> candidates;
    for (int s = 0; s < nseeds; ++s) {
        std::vector<cd> us0;
        us0.reserve(M);
        for (int i = 0; i < M; ++i) us0.push_back(rng.annulus(0.7, 1.4));
        auto us = newton_refine(us0, p);
        if (!us || !roots_regular(*us, p)) continue;
        ++rep.converged;
        bool dup = false;
        for (const auto& seen : candidates)
            if (detail::same_root_set(*us, seen, dedup_tol)) {
                dup = true;
                break;
            }
        if (!dup) candidates.push_back(*us);
    }

    if (p.dim() > 3000) {
        // vector screens need the dense blocks; report equation residuals only
        for (const auto& us : candidates) {
            BetheSolution sol;
            sol.roots = us;
            sol.equation_residual = bethe_residual(us, p);
            sol.vector_norm_ratio = -1.0;
            sol.eigen_residual = -1.0;
            rep.solutions.push_back(sol);
        }
        return rep;
    }

    BlockCache cache(p);
    const Mat t_probe = transfer_matrix(rep.probe, p);
    const double t_norm = t_probe.norm();
    const double sqrt_dim = std::sqrt(static_cast<double>(p.dim()));
    for (const auto& us : candidates) {
        BetheSolution sol;
        sol.roots = us;
        sol.equation_residual = bethe_residual(us, p);
        Vec psi = bethe_vector(us, cache);
        double scale = 1.0;
        for (cd u : us) scale *= u_entry_dense(cache.rows(u), 0, 2).norm() / sqrt_dim;
        sol.vector_norm_ratio = psi.norm() / std::max(scale, 1e-300);
        cd lam = transfer_eigenvalue(rep.probe, us, p);
        sol.eigen_residual =
            (t_probe * psi - lam * psi).norm() / std::max(t_norm * psi.norm(), 1e-300);
        bool collapsed = sol.vector_norm_ratio < 1e-12;
        bool off_spectrum = sol.eigen_residual > 1e-6;
        if (collapsed || off_spectrum)
            ++rep.spurious;
        else
            rep.solutions.push_back(sol);
    }
    return rep;
}

// One-magnon solutions in closed form: the even powers of the primitive root
// of unity parameterize them, excluding the two degenerate directions.
inline std::vector<cd> closed_form_m1(const ModelParams& p) {
    std::vector<cd> roots;
    std::vector<cd> keys;
    for (int k = 0; k < 2 * p.N; ++k) {
        cd z = std::exp(cd(0.0, M_PI * k / p.N));
        if (std::abs(z - 1.0) < 1e-12 || std::abs(z + 1.0) < 1e-12) continue;
        cd u2 = (1.0 / p.q - z) / (p.q - z);
        bool seen = false;
        for (cd kk : keys)
            if (std::abs(kk - u2) < 1e-9) {
                seen = true;
                break;
            }
        if (seen) continue;
        keys.push_back(u2);
        roots.push_back(std::sqrt(u2));
    }
    return roots;
}

// ---------------------------------------------------------------------------
// comparison with brute-force diagonalization
// ---------------------------------------------------------------------------
struct EdMatch {
    int n_solutions = 0;
    int n_spurious = 0;
    double worst_eigenvalue_gap = 0.0;   // distance to the closest probe eigenvalue
    double worst_vector_residual = 0.0;  // eigenvector property of the assembled state
};

inline EdMatch verify_against_ed(const SolveReport& rep, const ModelParams& p,
                                 int nprobes = 3) {
    if (p.N > 7) throw std::invalid_argument("brute-force comparison is capped at N = 7");
    EdMatch out;
    out.n_solutions = static_cast<int>(rep.solutions.size());
    out.n_spurious = rep.spurious;
    Rng rng(p.rng_seed, "ed-probes");
    BlockCache cache(p);
    for (int k = 0; k < nprobes; ++k) {
        cd v = rng.annulus(0.8, 1.3);
        Mat tv = transfer_matrix(v, p);
        Eigen::ComplexEigenSolver<Mat> es(tv, false);
        const auto& spec = es.eigenvalues();
        for (const auto& sol : rep.solutions) {
            cd lam = transfer_eigenvalue(v, sol.roots, p);
            double best = 1e300;
            for (Eigen::Index i = 0; i < spec.size(); ++i)
                best = std::min(best, std::abs(spec(i) - lam));
            out.worst_eigenvalue_gap =
                std::max(out.worst_eigenvalue_gap, best / std::max(1.0, std::abs(lam)));
            Vec psi = bethe_vector(sol.roots, cache);
            double vr = (tv * psi - lam * psi).norm() /
                        std::max(tv.norm() * psi.norm(), 1e-300);
            out.worst_vector_residual = std::max(out.worst_vector_residual, vr);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// string reordering identities and the off-shell action
// ---------------------------------------------------------------------------
namespace detail {

inline Mat bstring(BlockCache& cache, const std::vector<cd>& us) {
    const Eigen::Index dim = cache.params().dim();
    Mat out = Mat::Identity(dim, dim);
    for (cd u : us) out = out * cache.at(u).B;
    return out;
}

inline Mat cstring(BlockCache& cache, const std::vector<cd>& us) {
    const Eigen::Index dim = cache.params().dim();
    Mat out = Mat::Identity(dim, dim);
    for (auto it = us.rbegin(); it != us.rend(); ++it) out = out * cache.at(*it).C;
    return out;
}

struct StringContext {
    cd u;
    std::vector<cd> ubar;
    std::vector<cd> ext;  // {u, ubar...}
    BlockCache* cache;
    const ModelParams* p;

    int M() const { return static_cast<int>(ubar.size()); }

    std::vector<cd> ubar_without(int i) const {  // 1-based i
        std::vector<cd> out;
        for (int j = 1; j <= M(); ++j)
            if (j != i) out.push_back(ubar[j - 1]);
        return out;
    }
};

// B(u) times the string with slot i removed
inline Mat b_without(const StringContext& c, int i) {
    return c.cache->at(c.u).B * bstring(*c.cache, c.ubar_without(i));
}

// string with the pair at slots i, i+1 of {u, ubar} replaced by the wide pair
inline Mat b_wide_pair(const StringContext& c, int i) {  // 0-based i
    const Eigen::Index dim = c.p->dim();
    Mat out = Mat::Identity(dim, dim);
    for (int j = 0; j < i; ++j) out = out * c.cache->at(c.ext[j]).B;
    out = out * c.cache->at(c.ext[i]).B1 * c.cache->at(c.ext[i + 1]).B2;
    for (int j = i + 2; j <= c.M(); ++j) out = out * c.cache->at(c.ext[j]).B;
    return out;
}

// string with slot i of {u, ubar} replaced by the central block
inline Mat b_central(const StringContext& c, int i) {  // 1-based i
    const Eigen::Index dim = c.p->dim();
    Mat out = Mat::Identity(dim, dim);
    for (int j = 0; j < i; ++j) out = out * c.cache->at(c.ext[j]).B;
    out = out * c.cache->at(c.ext[i]).E;
    for (int j = i + 1; j <= c.M(); ++j) out = out * c.cache->at(c.ext[j]).B;
    return out;
}

// dual-side analogues; the annihilation string runs in reverse order
inline Mat c_without(const StringContext& c, int i) {
    const Eigen::Index dim = c.p->dim();
    Mat out = Mat::Identity(dim, dim);
    for (int j = c.M(); j >= 1; --j)
        if (j != i) out = out * c.cache->at(c.ubar[j - 1]).C;
    return out * c.cache->at(c.u).C;
}

inline Mat c_wide_pair(const StringContext& c, int i) {  // 0-based i
    const Eigen::Index dim = c.p->dim();
    Mat out = Mat::Identity(dim, dim);
    for (int j = c.M(); j >= i + 2; --j) out = out * c.cache->at(c.ext[j]).C;
    out = out * c.cache->at(c.ext[i + 1]).C2 * c.cache->at(c.ext[i]).C1;
    for (int j = i - 1; j >= 0; --j) out = out * c.cache->at(c.ext[j]).C;
    return out;
}

inline Mat c_central(const StringContext& c, int i) {  // 1-based i
    const Eigen::Index dim = c.p->dim();
    Mat out = Mat::Identity(dim, dim);
    for (int j = c.M(); j >= i + 1; --j) out = out * c.cache->at(c.ext[j]).C;
    out = out * c.cache->at(c.ext[i]).E;
    for (int j = i - 1; j >= 0; --j) out = out * c.cache->at(c.ext[j]).C;
    return out;
}

// the nested partial-product sum shared by both reordering identities
inline Mat string_inner_op(const StringContext& c, int i, bool dual) {
    const ModelParams& p = *c.p;
    const Eigen::Index dim = p.dim();
    const cd qc = p.q + 1.0 / p.q;
    cd ui = c.ubar[i - 1];
    Mat head = dual ? Mat(c.cache->at(ui).A * c_without(c, i))
                    : Mat(b_without(c, i) * c.cache->at(ui).A);
    Mat headD = dual ? Mat(c.cache->at(ui).D * c_without(c, i))
                     : Mat(b_without(c, i) * c.cache->at(ui).D);
    Mat out = Mat::Zero(dim, dim);
    for (int k = 2; k <= i; ++k) {
        cd pf = 1.0, ph = 1.0;
        for (int j = k; j <= c.M(); ++j) {
            if (j == i) continue;
            pf *= coeff::f(ui, c.ubar[j - 1], p);
            ph *= coeff::h(ui, c.ubar[j - 1], p);
        }
        out += coeff::r_coeff(k - 2, p) *
               (-coeff::d(ui, p) / (p.Q * p.Q) * head * pf + headD * ph);
    }
    return qc * out;
}

}  // namespace detail

enum class DiagonalBlock { A, D };
enum class StringSide { Creation, Annihilation };

// Reordering of a diagonal block through a string of M creation blocks (or the
// dual statement for annihilation strings): the left-hand product equals the
// wanted term plus exchange, wide-pair and central-block corrections with the
// scalar weights from the coefficient layer.
inline double check_string_reordering(cd u, const std::vector<cd>& ubar, DiagonalBlock which,
                                      StringSide side, const ModelParams& p) {
    detail::StringContext c;
    BlockCache cache(p);
    c.u = u;
    c.ubar = ubar;
    c.ext = ubar;
    c.ext.insert(c.ext.begin(), u);
    c.cache = &cache;
    c.p = &p;
    const int M = c.M();
    const bool dual = side == StringSide::Annihilation;
    const cd Qm2 = 1.0 / (p.Q * p.Q);
    const cd au = coeff::a(u, p);

    Mat big = dual ? detail::cstring(cache, ubar) : detail::bstring(cache, ubar);
    const Mat& blkA = cache.at(u).A;
    const Mat& blkD = cache.at(u).D;
    const Mat& blkE = cache.at(u).E;

    auto hat_term = [&](int i, bool dside) {
        cd ui = ubar[i - 1];
        cd pf = 1.0, ph = 1.0;
        for (int j = 1; j <= M; ++j) {
            if (j == i) continue;
            pf *= coeff::f(ui, ubar[j - 1], p);
            ph *= coeff::h(ui, ubar[j - 1], p);
        }
        cd wa = dside ? coeff::h2(u, ui, p) : coeff::f1(u, ui, p);
        cd wd = dside ? coeff::h1(u, ui, p) : coeff::f2(u, ui, p);
        Mat termA = dual ? Mat(cache.at(ui).A * detail::c_without(c, i))
                         : Mat(detail::b_without(c, i) * cache.at(ui).A);
        Mat termD = dual ? Mat(cache.at(ui).D * detail::c_without(c, i))
                         : Mat(detail::b_without(c, i) * cache.at(ui).D);
        return Mat(wa * pf * termA + wd * ph * termD);
    };

    Mat lhs, rhs;
    if (which == DiagonalBlock::A) {
        lhs = dual ? Mat(big * blkA) : Mat(blkA * big);
        cd wanted = 1.0;
        for (cd x : ubar) wanted *= coeff::f(u, x, p);
        rhs = dual ? Mat(wanted * blkA * big) : Mat(wanted * big * blkA);
        for (int i = 1; i <= M; ++i) rhs += hat_term(i, false);
        for (int i = 2; i <= M; ++i) rhs += detail::string_inner_op(c, i, dual);
        for (int i = 0; i < M; ++i)
            rhs += coeff::r_coeff(i, p) *
                   (dual ? detail::c_wide_pair(c, i) : detail::b_wide_pair(c, i));
        for (int i = 1; i < M; ++i)
            rhs += coeff::s_coeff(i, p) *
                   (dual ? detail::c_central(c, i) : detail::b_central(c, i));
        if (M >= 1)
            rhs += coeff::alpha_coeff(u, ubar, p) *
                   (dual ? detail::c_central(c, M) : detail::b_central(c, M));
    } else {
        lhs = dual ? Mat(big * blkD) : Mat(blkD * big);
        cd wanted = 1.0;
        for (cd x : ubar) wanted *= coeff::h(u, x, p);
        rhs = dual ? Mat(wanted * blkD * big) : Mat(wanted * big * blkD);
        for (int i = 1; i <= M; ++i) rhs += hat_term(i, true);
        for (int i = 2; i <= M; ++i) rhs -= Qm2 * au * detail::string_inner_op(c, i, dual);
        for (int i = 0; i < M; ++i)
            rhs -= Qm2 * au * coeff::r_coeff(i, p) *
                   (dual ? detail::c_wide_pair(c, i) : detail::b_wide_pair(c, i));
        for (int i = 1; i < M; ++i)
            rhs -= Qm2 * au * coeff::s_coeff(i, p) *
                   (dual ? detail::c_central(c, i) : detail::b_central(c, i));
        if (M >= 1)
            rhs += coeff::delta_coeff(u, ubar, p) *
                   (dual ? detail::c_central(c, M) : detail::b_central(c, M));
        rhs -= Qm2 * (dual ? Mat(big * blkE) : Mat(blkE * big));
    }
    return rel_residual(lhs, rhs);
}

// Off-shell action of the transfer matrix on an assembled string state: the
// wanted eigenvalue term plus one correction per rapidity, each weighted by
// the off-shell kernel and that rapidity's Bethe-equation component.
inline double check_offshell_action(cd u, const std::vector<cd>& ubar, StringSide side,
                                    const ModelParams& p) {
    BlockCache cache(p);
    const int M = static_cast<int>(ubar.size());
    Mat t = transfer_matrix(u, p);
    cd lam = transfer_eigenvalue(u, ubar, p);

    if (side == StringSide::Creation) {
        Vec ket = bethe_vector(ubar, cache);
        Vec lhs = t * ket;
        Vec rhs = lam * ket;
        for (int i = 1; i <= M; ++i) {
            cd ui = ubar[i - 1];
            std::vector<cd> rest;
            for (int j = 1; j <= M; ++j)
                if (j != i) rest.push_back(ubar[j - 1]);
            cd Ei = bethe_component(ubar, i - 1, p);
            std::vector<cd> swapped;
            swapped.push_back(u);
            for (cd x : rest) swapped.push_back(x);
            rhs += coeff::kernel(u, ui, p) * Ei * bethe_vector(swapped, cache);
        }
        return (lhs - rhs).norm() / std::max(lhs.norm(), rhs.norm());
    }
    RowVec bra = dual_bethe_vector(ubar, cache);
    RowVec lhs = bra * t;
    RowVec rhs = lam * bra;
    for (int i = 1; i <= M; ++i) {
        cd ui = ubar[i - 1];
        std::vector<cd> rest;
        for (int j = 1; j <= M; ++j)
            if (j != i) rest.push_back(ubar[j - 1]);
        cd Ei = bethe_component(ubar, i - 1, p);
        RowVec brai = dual_bethe_vector(rest, cache) * cache.at(u).C;
        rhs += coeff::kernel(u, ui, p) * Ei * brai;
    }
    return (lhs - rhs).norm() / std::max(lhs.norm(), rhs.norm());
}

}  // namespace tlbethe
