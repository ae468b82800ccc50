#pragma once

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tlbethe/scalar_product.hpp"

namespace tlbethe {
namespace cli {

using json = nlohmann::ordered_json;

struct RunConfig {
    std::string command = "check";
    int N = 3;
    cd Q{1.1, 0.0};
    Branch branch = Branch::Plus;
    int M = 1;
    int seeds = 200;
    std::uint64_t rng_seed = 12345;
    double tol_identity = 1e-9;
    double tol_derivative = 1e-5;
    std::string format = "json";  // json | table
    std::string out_path;         // empty: stdout
    std::vector<cd> u_explicit;   // optional rapidities for the overlap command
    std::vector<cd> v_explicit;
};

// "re" or "re,im"
inline cd parse_complex(const std::string& s) {
    std::istringstream is(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(is >> re)) throw std::invalid_argument("cannot parse complex number: " + s);
    if (is >> comma) {
        if (comma != ',' || !(is >> im))
            throw std::invalid_argument("cannot parse complex number: " + s);
    }
    std::string rest;
    if (is >> rest) throw std::invalid_argument("trailing characters in complex number: " + s);
    return {re, im};
}

inline Branch parse_branch(const std::string& s) {
    if (s == "plus") return Branch::Plus;
    if (s == "minus") return Branch::Minus;
    throw std::invalid_argument("branch must be plus or minus");
}

inline json to_json(cd z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const std::vector<cd>& zs) {
    json arr = json::array();
    for (cd z : zs) arr.push_back(to_json(z));
    return arr;
}

inline json params_json(const RunConfig& cfg) {
    json j;
    j["N"] = cfg.N;
    j["Q"] = to_json(cfg.Q);
    j["branch"] = cfg.branch == Branch::Plus ? "plus" : "minus";
    j["rng_seed"] = cfg.rng_seed;
    return j;
}

// ---------------------------------------------------------------------------
// check suite
// ---------------------------------------------------------------------------
struct CheckResult {
    std::string name;
    std::string relation;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string error;
};

namespace detail {

struct CheckJob {
    std::string name;
    std::string relation;
    double tolerance;
    std::function<double(Rng&)> run;
};

inline cd draw_point(Rng& rng) { return rng.annulus(0.6, 1.6); }

// points kept clear of the evaluation guards
inline cd draw_regular(Rng& rng, const ModelParams& p) {
    for (int tries = 0; tries < 256; ++tries) {
        cd u = draw_point(rng);
        if (rapidities_admissible({u}, p, 1e-3)) return u;
    }
    throw std::runtime_error("could not draw a regular point");
}

inline std::vector<cd> draw_regular_set(Rng& rng, const ModelParams& p, int count,
                                        double guard = 1e-3) {
    for (int tries = 0; tries < 256; ++tries) {
        std::vector<cd> us;
        for (int i = 0; i < count; ++i) us.push_back(draw_point(rng));
        if (rapidities_admissible(us, p, guard)) return us;
    }
    throw std::runtime_error("could not draw a regular point set");
}

inline std::vector<CheckJob> build_check_jobs(const RunConfig& cfg) {
    const ModelParams base = make_params(cfg.N, cfg.Q, cfg.branch, cfg.rng_seed);
    const double tol = cfg.tol_identity;
    const int n_chain = std::clamp(cfg.N, 2, 4);   // full-chain operator checks
    const int n_joint = std::clamp(cfg.N, 2, 3);   // two-auxiliary-space checks
    const int n_blocks = std::clamp(cfg.N, 2, 3);  // block-level identity checks
    std::vector<CheckJob> jobs;

    jobs.push_back({"tl-relations",
                    "X_i^2 = c X_i; X_i X_{i+-1} X_i = X_i; [X_i, X_j] = 0 for |i-j| > 1",
                    tol, [=](Rng& rng) {
                        double worst = check_tl_relations(make_params(std::max(cfg.N, 3),
                                                                      cfg.Q, cfg.branch,
                                                                      cfg.rng_seed))
                                           .worst();
                        for (int k = 0; k < 5; ++k) {
                            cd Qr = rng.annulus(0.5, 2.0);
                            worst = std::max(worst,
                                             check_tl_relations(
                                                 make_params(3, Qr, cfg.branch, cfg.rng_seed))
                                                 .worst());
                        }
                        return worst;
                    }});

    jobs.push_back({"biquadratic-point", "X at Q = 1 equals (S.S)^2 - 1 entrywise", tol,
                    [=](Rng&) {
                        ModelParams p1 = make_params(2, 1.0, cfg.branch, cfg.rng_seed);
                        return (build_X(p1) - build_biquadratic_generator())
                            .cwiseAbs()
                            .maxCoeff();
                    }});

    jobs.push_back({"yang-baxter", "R12(u/v) R13(u) R23(v) = R23(v) R13(u) R12(u/v)", tol,
                    [=](Rng& rng) {
                        double worst = 0.0;
                        for (int k = 0; k < 20; ++k) {
                            auto uv = draw_regular_set(rng, base, 2);
                            worst = std::max(worst,
                                             check_yang_baxter(uv[0], uv[1], base));
                        }
                        return worst;
                    }});

    jobs.push_back({"unitarity", "R12(u) R21(1/u) = zeta(u) I", tol, [=](Rng& rng) {
                        double worst = 0.0;
                        for (int k = 0; k < 20; ++k)
                            worst = std::max(worst,
                                             check_unitarity(draw_regular(rng, base), base));
                        return worst;
                    }});

    jobs.push_back({"rtt", "R12(u/v) T1(u) T2(v) = T2(v) T1(u) R12(u/v)", tol,
                    [=](Rng& rng) {
                        ModelParams p = make_params(n_joint, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            auto uv = draw_regular_set(rng, p, 2);
                            worst = std::max(worst, check_rtt(uv[0], uv[1], p));
                        }
                        return worst;
                    }});

    jobs.push_back({"reflection-equation",
                    "R12(u/v) U1(u) R21(uv) U2(v) = U2(v) R12(uv) U1(u) R21(u/v)", tol,
                    [=](Rng& rng) {
                        ModelParams p = make_params(n_joint, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            auto uv = draw_regular_set(rng, p, 2);
                            worst = std::max(worst,
                                             check_reflection_equation(uv[0], uv[1], p));
                        }
                        return worst;
                    }});

    jobs.push_back({"transfer-commutativity", "[t(u), t(v)] = 0", tol, [=](Rng& rng) {
                        ModelParams p = make_params(n_chain, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            auto uv = draw_regular_set(rng, p, 2);
                            Mat tu = transfer_matrix(uv[0], p);
                            Mat tv = transfer_matrix(uv[1], p);
                            worst = std::max(worst, rel_residual(tu * tv, tv * tu));
                        }
                        return worst;
                    }});

    jobs.push_back({"hamiltonian-analytic",
                    "alpha t'(1) + beta I equals the sum of two-site generators", tol,
                    [=](Rng&) {
                        ModelParams p = make_params(n_chain, cfg.Q, cfg.branch, cfg.rng_seed);
                        return rel_residual(hamiltonian_from_transfer(p),
                                            build_hamiltonian(p).to_dense());
                    }});

    jobs.push_back({"hamiltonian-fd",
                    "central difference of t at u = 1 against the analytic derivative",
                    cfg.tol_derivative, [=](Rng&) {
                        ModelParams p = make_params(n_chain, cfg.Q, cfg.branch, cfg.rng_seed);
                        return rel_residual(hamiltonian_from_transfer_fd(p),
                                            hamiltonian_from_transfer(p));
                    }});

    jobs.push_back({"exchange-relations",
                    "the ten two-point reorderings of the double-row blocks", tol,
                    [=](Rng& rng) {
                        ModelParams p = make_params(n_blocks, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            auto uv = draw_regular_set(rng, p, 2);
                            worst = std::max(
                                worst, max_residual(check_exchange_relations(uv[0], uv[1], p)));
                        }
                        return worst;
                    }});

    jobs.push_back({"cb-commutation",
                    "C(u) B(v) reordered into diagonal, central and wide-pair terms", tol,
                    [=](Rng& rng) {
                        ModelParams p = make_params(n_blocks, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            auto uv = draw_regular_set(rng, p, 2);
                            worst = std::max(worst, check_cb_relation(uv[0], uv[1], p));
                        }
                        return worst;
                    }});

    jobs.push_back({"kernel-identities",
                    "a f1 + Q^2 h2 = H and a f2 + Q^2 h1 = -Q^2 H / d", tol, [=](Rng& rng) {
                        double worst = 0.0;
                        for (int k = 0; k < 10; ++k) {
                            auto uv = draw_regular_set(rng, base, 2);
                            auto [r1, r2] = coeff::kernel_identity_residuals(uv[0], uv[1], base);
                            worst = std::max({worst, r1, r2});
                        }
                        return worst;
                    }});

    jobs.push_back({"family-identities",
                    "the ten weight-family sums cancel or collapse to the closed forms", tol,
                    [=](Rng& rng) {
                        double worst = 0.0;
                        for (int M = 1; M <= 3; ++M) {
                            for (int k = 0; k < 5; ++k) {
                                auto pts = draw_regular_set(rng, base, M + 2);
                                cd u = pts[0], w = pts[1];
                                std::vector<cd> ub(pts.begin() + 2, pts.end());
                                worst = std::max(worst,
                                                 max_residual(coeff::family_identity_residuals(
                                                     u, ub, w, base)));
                            }
                        }
                        return worst;
                    }});

    jobs.push_back({"family-large-u",
                    "wide-pair weight sum settles on r_M as |u| grows", tol, [=](Rng& rng) {
                        auto pts = draw_regular_set(rng, base, 4);
                        std::vector<cd> ub(pts.begin(), pts.begin() + 3);
                        return coeff::large_u_b2_residual(ub, pts[3], base, 1e6);
                    }});

    jobs.push_back({"vacuum-actions",
                    "diagonal blocks scale the vacuum; lowering blocks kill it", tol,
                    [=](Rng& rng) {
                        ModelParams p = make_params(n_blocks, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 3; ++k)
                            worst = std::max(worst, max_residual(check_vacuum_actions(
                                                        draw_regular(rng, p), p)));
                        return worst;
                    }});

    const struct {
        const char* name;
        DiagonalBlock blk;
        StringSide side;
    } reorder[] = {
        {"string-reordering-creation-a", DiagonalBlock::A, StringSide::Creation},
        {"string-reordering-creation-d", DiagonalBlock::D, StringSide::Creation},
        {"string-reordering-annihilation-a", DiagonalBlock::A, StringSide::Annihilation},
        {"string-reordering-annihilation-d", DiagonalBlock::D, StringSide::Annihilation},
    };
    for (const auto& r : reorder) {
        auto blk = r.blk;
        auto side = r.side;
        jobs.push_back(
            {r.name, "a diagonal block moved through a string of raising blocks", tol,
             [=](Rng& rng) {
                 ModelParams p = make_params(n_blocks, cfg.Q, cfg.branch, cfg.rng_seed);
                 double worst = 0.0;
                 for (int M = 1; M <= 3; ++M) {
                     if (M >= 3 && p.N < 3) continue;  // the triple string vanishes at N = 2
                     auto pts = draw_regular_set(rng, p, M + 1);
                     std::vector<cd> ub(pts.begin() + 1, pts.end());
                     worst = std::max(worst, check_string_reordering(pts[0], ub, blk, side, p));
                 }
                 return worst;
             }});
    }

    for (StringSide side : {StringSide::Creation, StringSide::Annihilation}) {
        std::string nm = side == StringSide::Creation ? "offshell-creation"
                                                      : "offshell-annihilation";
        jobs.push_back(
            {nm, "t(u) on a string state: eigenvalue term plus kernel-weighted swaps", tol,
             [=](Rng& rng) {
                 ModelParams p = make_params(n_blocks, cfg.Q, cfg.branch, cfg.rng_seed);
                 double worst = 0.0;
                 for (int M = 0; M <= 3; ++M) {
                     if (M >= 3 && p.N < 3) continue;
                     for (int k = 0; k < 2; ++k) {
                         auto pts = draw_regular_set(rng, p, M + 1);
                         std::vector<cd> ub(pts.begin() + 1, pts.end());
                         worst = std::max(worst, check_offshell_action(pts[0], ub, side, p));
                     }
                 }
                 return worst;
             }});
    }

    jobs.push_back({"m1-expansion",
                    "vacuum expectation of C(u) B(v) against the weight expansion", tol,
                    [=](Rng& rng) {
                        ModelParams p = make_params(n_blocks, cfg.Q, cfg.branch, cfg.rng_seed);
                        double worst = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            auto uv = draw_regular_set(rng, p, 2);
                            worst = std::max(worst, check_m1_expansion(uv[0], uv[1], p));
                        }
                        return worst;
                    }});

    jobs.push_back({"c2-annihilation",
                    "the wide lowering block kills the vacuum at one-magnon roots", tol,
                    [=](Rng&) {
                        ModelParams p = make_params(std::clamp(cfg.N, 2, 6), cfg.Q, cfg.branch,
                                                    cfg.rng_seed);
                        double worst = 0.0;
                        for (cd u : closed_form_m1(p))
                            worst = std::max(worst, c2_annihilation_ratio(u, p));
                        return worst;
                    }});

    jobs.push_back({"bethe-closed-form",
                    "one-magnon closed-form roots solve the Bethe system", tol, [=](Rng&) {
                        ModelParams p = make_params(std::clamp(cfg.N, 2, 6), cfg.Q, cfg.branch,
                                                    cfg.rng_seed);
                        double worst = 0.0;
                        for (cd u : closed_form_m1(p))
                            worst = std::max(worst, bethe_residual({u}, p));
                        return worst;
                    }});

    jobs.push_back({"spectrum-q-inverse",
                    "the Hamiltonian spectrum is invariant under Q -> 1/Q", tol, [=](Rng&) {
                        ModelParams pa = make_params(n_chain, cfg.Q, cfg.branch, cfg.rng_seed);
                        ModelParams pb =
                            make_params(n_chain, 1.0 / cfg.Q, cfg.branch, cfg.rng_seed);
                        Eigen::ComplexEigenSolver<Mat> ea(build_hamiltonian(pa).to_dense(),
                                                          false);
                        Eigen::ComplexEigenSolver<Mat> eb(build_hamiltonian(pb).to_dense(),
                                                          false);
                        std::vector<cd> sa(ea.eigenvalues().data(),
                                           ea.eigenvalues().data() + ea.eigenvalues().size());
                        std::vector<cd> sb(eb.eigenvalues().data(),
                                           eb.eigenvalues().data() + eb.eigenvalues().size());
                        auto lex = [](cd a, cd b) {
                            if (a.real() != b.real()) return a.real() < b.real();
                            return a.imag() < b.imag();
                        };
                        std::sort(sa.begin(), sa.end(), lex);
                        std::sort(sb.begin(), sb.end(), lex);
                        double worst = 0.0, scale = 1.0;
                        for (size_t i = 0; i < sa.size(); ++i) {
                            worst = std::max(worst, std::abs(sa[i] - sb[i]));
                            scale = std::max(scale, std::abs(sa[i]));
                        }
                        return worst / scale;
                    }});

    return jobs;
}

}  // namespace detail

inline std::vector<CheckResult> run_check_suite(const RunConfig& cfg) {
    auto jobs = detail::build_check_jobs(cfg);
    std::vector<CheckResult> results(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            CheckResult r;
            r.name = jobs[i].name;
            r.relation = jobs[i].relation;
            r.tolerance = jobs[i].tolerance;
            try {
                Rng rng(cfg.rng_seed, jobs[i].name);
                r.residual = jobs[i].run(rng);
                r.pass = r.residual < r.tolerance;
            } catch (const std::exception& e) {
                r.residual = std::numeric_limits<double>::infinity();
                r.pass = false;
                r.error = e.what();
            }
            results[i] = std::move(r);
        }
    };
    unsigned n = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                       static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::sort(results.begin(), results.end(),
              [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
    return results;
}

// ---------------------------------------------------------------------------
// output plumbing
// ---------------------------------------------------------------------------
namespace detail {

inline int emit(const RunConfig& cfg, const json& doc, const std::string& table,
                int exit_code) {
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!cfg.out_path.empty()) {
        file.open(cfg.out_path);
        if (!file) throw std::invalid_argument("cannot open output path: " + cfg.out_path);
        out = &file;
    }
    if (cfg.format == "table")
        *out << table;
    else
        *out << doc.dump(2) << "\n";
    return exit_code;
}

}  // namespace detail

inline int cmd_check(const RunConfig& cfg) {
    auto results = run_check_suite(cfg);
    bool all_pass = true;
    json arr = json::array();
    auto sci = [](double x, int prec) {
        std::ostringstream os;
        os << std::scientific << std::setprecision(prec) << x;
        return os.str();
    };
    std::ostringstream tab;
    tab << std::left << std::setw(38) << "check" << std::setw(14) << "residual"
        << std::setw(12) << "tolerance" << "status\n";
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        json e;
        e["name"] = r.name;
        e["relation"] = r.relation;
        e["residual"] = r.residual;
        e["tolerance"] = r.tolerance;
        e["pass"] = r.pass;
        if (!r.error.empty()) e["error"] = r.error;
        arr.push_back(e);
        tab << std::left << std::setw(38) << r.name << std::setw(14) << sci(r.residual, 2)
            << std::setw(12) << sci(r.tolerance, 0) << (r.pass ? "pass" : "FAIL") << "\n";
    }
    json doc;
    doc["schema"] = "tl-bethe/1";
    doc["command"] = "check";
    doc["params"] = params_json(cfg);
    doc["tolerances"] =
        json{{"identity", cfg.tol_identity}, {"derivative", cfg.tol_derivative}};
    doc["checks"] = arr;
    doc["all_pass"] = all_pass;
    tab << (all_pass ? "all checks passed\n" : "CHECK FAILURES PRESENT\n");
    return detail::emit(cfg, doc, tab.str(), all_pass ? 0 : 1);
}

inline int cmd_solve(const RunConfig& cfg) {
    if (cfg.M < 1) throw std::invalid_argument("solve needs M >= 1");
    ModelParams p = make_params(cfg.N, cfg.Q, cfg.branch, cfg.rng_seed);
    SolveReport rep = solve_bethe(cfg.M, p, cfg.seeds);

    Rng probe_rng(cfg.rng_seed, "ed-probes");
    std::vector<cd> probes;
    for (int k = 0; k < 3; ++k) probes.push_back(probe_rng.annulus(0.8, 1.3));

    const bool ed_ok = p.N <= 7;
    std::vector<Vec> spectra;
    if (ed_ok)
        for (cd v : probes) {
            Eigen::ComplexEigenSolver<Mat> es(transfer_matrix(v, p), false);
            spectra.push_back(es.eigenvalues());
        }

    json sols = json::array();
    std::ostringstream tab;
    tab << "solutions for M = " << cfg.M << ", N = " << cfg.N << "\n";
    for (const auto& sol : rep.solutions) {
        json e;
        e["roots"] = to_json(sol.roots);
        std::vector<cd> r2;
        for (cd u : sol.roots) r2.push_back(u * u);
        e["roots_squared"] = to_json(r2);
        e["equation_residual"] = sol.equation_residual;
        e["vector_norm_ratio"] = sol.vector_norm_ratio;
        e["eigen_residual"] = sol.eigen_residual;
        json evs = json::array();
        double gap = 0.0;
        for (size_t k = 0; k < probes.size(); ++k) {
            cd lam = transfer_eigenvalue(probes[k], sol.roots, p);
            json pe;
            pe["probe"] = to_json(probes[k]);
            pe["value"] = to_json(lam);
            if (ed_ok) {
                double best = 1e300;
                for (Eigen::Index i = 0; i < spectra[k].size(); ++i)
                    best = std::min(best, std::abs(spectra[k](i) - lam));
                best /= std::max(1.0, std::abs(lam));
                pe["ed_gap"] = best;
                gap = std::max(gap, best);
            }
            evs.push_back(pe);
        }
        e["eigenvalue_at_probes"] = evs;
        if (ed_ok) e["ed_gap"] = gap;
        sols.push_back(e);
        tab << "  roots:";
        for (cd u : sol.roots) tab << " (" << u.real() << "," << u.imag() << ")";
        tab << "  residual " << std::scientific << std::setprecision(2)
            << sol.equation_residual;
        if (ed_ok) tab << "  ed gap " << gap;
        tab << "\n";
    }
    json doc;
    doc["schema"] = "tl-bethe/1";
    doc["command"] = "solve";
    doc["params"] = params_json(cfg);
    doc["M"] = cfg.M;
    doc["seeds"] = cfg.seeds;
    doc["probe"] = to_json(rep.probe);
    doc["converged"] = rep.converged;
    doc["spurious_rejected"] = rep.spurious;
    doc["ed"] = ed_ok ? "ok" : "skipped: dimension cap";
    doc["solutions"] = sols;
    tab << rep.solutions.size() << " solutions, " << rep.spurious
        << " spurious candidates rejected, " << rep.converged << " seeds converged\n";
    int code = rep.converged == 0 ? 1 : 0;
    return detail::emit(cfg, doc, tab.str(), code);
}

inline int cmd_diagonalize(const RunConfig& cfg) {
    if (cfg.N > 7) throw std::invalid_argument("dense diagonalization is capped at N = 7");
    ModelParams p = make_params(cfg.N, cfg.Q, cfg.branch, cfg.rng_seed);
    Eigen::ComplexEigenSolver<Mat> es(build_hamiltonian(p).to_dense(), false);
    std::vector<cd> spec(es.eigenvalues().data(),
                         es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(spec.begin(), spec.end(), [](cd a, cd b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    json doc;
    doc["schema"] = "tl-bethe/1";
    doc["command"] = "diagonalize";
    doc["params"] = params_json(cfg);
    doc["hamiltonian_spectrum"] = to_json(spec);
    std::ostringstream tab;
    tab << "Hamiltonian spectrum, N = " << cfg.N << "\n";
    for (cd z : spec)
        tab << "  " << std::setprecision(12) << z.real() << "  " << z.imag() << "\n";

    if (p.dim() <= 3000) {
        cd v0 = cd(0.9) * std::exp(cd(0.0, 0.3));
        Eigen::ComplexEigenSolver<Mat> et(transfer_matrix(v0, p), false);
        std::vector<cd> tspec(et.eigenvalues().data(),
                              et.eigenvalues().data() + et.eigenvalues().size());
        std::sort(tspec.begin(), tspec.end(), [](cd a, cd b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });
        doc["transfer_probe"] = to_json(v0);
        doc["transfer_spectrum"] = to_json(tspec);
    }
    return detail::emit(cfg, doc, tab.str(), 0);
}

inline int cmd_slavnov(const RunConfig& cfg) {
    if (cfg.M < 1 || cfg.M > 2)
        throw std::invalid_argument("the overlap command supports M = 1 or 2");
    if (cfg.N > 6) throw std::invalid_argument("the overlap command is capped at N = 6");
    ModelParams p = make_params(cfg.N, cfg.Q, cfg.branch, cfg.rng_seed);

    std::vector<std::vector<cd>> usets;
    int converged = -1, spurious = -1;
    if (!cfg.u_explicit.empty()) {
        if (static_cast<int>(cfg.u_explicit.size()) != cfg.M)
            throw std::invalid_argument("need exactly M explicit u-values");
        if (bethe_residual(cfg.u_explicit, p) > 1e-6)
            throw std::invalid_argument("supplied u-set does not solve the Bethe equations");
        usets.push_back(cfg.u_explicit);
    } else {
        SolveReport rep = solve_bethe(cfg.M, p, cfg.seeds);
        converged = rep.converged;
        spurious = rep.spurious;
        for (const auto& s : rep.solutions) usets.push_back(s.roots);
        if (rep.converged == 0) {
            json doc;
            doc["schema"] = "tl-bethe/1";
            doc["command"] = "slavnov";
            doc["params"] = params_json(cfg);
            doc["error"] = "no converged seeds";
            return detail::emit(cfg, doc, "no converged seeds\n", 1);
        }
    }

    Rng vrng(cfg.rng_seed, "slavnov-v");
    json rows = json::array();
    std::ostringstream tab;
    bool genuine_failure = false;
    double worst = 0.0;
    for (const auto& us : usets) {
        BlockCache cache(p);
        for (int rep_i = 0; rep_i < 5; ++rep_i) {
            std::vector<cd> vs;
            if (!cfg.v_explicit.empty()) {
                if (static_cast<int>(cfg.v_explicit.size()) != cfg.M)
                    throw std::invalid_argument("need exactly M explicit v-values");
                if (rep_i > 0) break;
                vs = cfg.v_explicit;
            } else {
                for (int tries = 0;; ++tries) {
                    vs.clear();
                    for (int i = 0; i < cfg.M; ++i) vs.push_back(vrng.annulus(0.7, 1.4));
                    std::vector<cd> joint = us;
                    joint.insert(joint.end(), vs.begin(), vs.end());
                    if (rapidities_admissible(joint, p, 1e-3)) break;
                    if (tries > 256)
                        throw std::runtime_error("could not draw regular v-points");
                }
            }
            SlavnovResult sr = slavnov_scalar_product(us, vs, p);
            cd direct = direct_scalar_product(us, vs, cache);
            double rel = std::abs(sr.value - direct) /
                         std::max(std::abs(sr.value), std::abs(direct));
            worst = std::max(worst, rel);
            json row;
            row["ubar"] = to_json(us);
            row["vbar"] = to_json(vs);
            row["slavnov_value"] = to_json(sr.value);
            row["direct_value"] = to_json(direct);
            row["relative_error"] = rel;
            row["cauchy_condition"] = sr.cauchy_condition;
            rows.push_back(row);
            tab << "rel err " << std::scientific << std::setprecision(3) << rel
                << "  cond " << sr.cauchy_condition << "\n";
            if (rel > 1e-6 && sr.cauchy_condition < 1e10) genuine_failure = true;
            for (cd v : vs) cache.drop(v);
        }
    }
    json doc;
    doc["schema"] = "tl-bethe/1";
    doc["command"] = "slavnov";
    doc["params"] = params_json(cfg);
    doc["M"] = cfg.M;
    if (converged >= 0) {
        doc["converged"] = converged;
        doc["spurious_rejected"] = spurious;
    }
    doc["comparisons"] = rows;
    doc["worst_relative_error"] = worst;
    tab << rows.size() << " comparisons, worst relative error " << std::scientific
        << std::setprecision(3) << worst << "\n";
    return detail::emit(cfg, doc, tab.str(), genuine_failure ? 1 : 0);
}

inline int cmd_report(const RunConfig& cfg) {
    json doc;
    doc["schema"] = "tl-bethe/1";
    doc["command"] = "report";
    doc["params"] = params_json(cfg);

    auto results = run_check_suite(cfg);
    bool all_pass = true;
    json checks = json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        json e;
        e["name"] = r.name;
        e["relation"] = r.relation;
        e["residual"] = r.residual;
        e["tolerance"] = r.tolerance;
        e["pass"] = r.pass;
        if (!r.error.empty()) e["error"] = r.error;
        checks.push_back(e);
    }
    doc["checks"] = checks;
    doc["all_pass"] = all_pass;

    ModelParams p = make_params(cfg.N, cfg.Q, cfg.branch, cfg.rng_seed);
    if (cfg.M >= 1 && cfg.M <= p.N) {
        SolveReport rep = solve_bethe(cfg.M, p, cfg.seeds);
        json s;
        s["M"] = cfg.M;
        s["solutions"] = static_cast<int>(rep.solutions.size());
        s["converged"] = rep.converged;
        s["spurious_rejected"] = rep.spurious;
        double worst = 0.0;
        for (const auto& sol : rep.solutions)
            worst = std::max(worst, sol.equation_residual);
        s["worst_equation_residual"] = worst;
        doc["solve"] = s;
    }
    std::ostringstream tab;
    tab << "report: " << (all_pass ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
    return detail::emit(cfg, doc, tab.str(), all_pass ? 0 : 1);
}

// dispatch; maps exceptions to the usage exit code
inline int run(const RunConfig& cfg) {
    try {
        if (cfg.command == "check") return cmd_check(cfg);
        if (cfg.command == "solve") return cmd_solve(cfg);
        if (cfg.command == "diagonalize") return cmd_diagonalize(cfg);
        if (cfg.command == "slavnov") return cmd_slavnov(cfg);
        if (cfg.command == "report") return cmd_report(cfg);
        std::cerr << "unknown command: " << cfg.command << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cli
}  // namespace tlbethe
