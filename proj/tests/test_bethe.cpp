#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tlbethe/bethe.hpp"

using namespace tlbethe;

TEST_CASE("closed-form one-magnon roots solve the equations") {
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        for (int N : {2, 3, 4, 5}) {
            ModelParams p = make_params(N, 1.1, br);
            auto roots = closed_form_m1(p);
            REQUIRE(static_cast<int>(roots.size()) == 2 * N - 2);
            for (cd u : roots) {
                REQUIRE(bethe_residual({u}, p) < 1e-10);
                REQUIRE(oracles::m1_root_character(u, p) < 1e-10);
            }
        }
    }
}

TEST_CASE("newton refinement converges back from a perturbed root") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    for (cd u : closed_form_m1(p)) {
        auto refined = newton_refine({u * cd(1.01, 0.005)}, p);
        REQUIRE(refined.has_value());
        REQUIRE(std::abs((*refined)[0] * (*refined)[0] - u * u) < 1e-10);
        REQUIRE(bethe_residual(*refined, p) < 1e-12);
    }
}

TEST_CASE("multi-start search recovers exactly the closed-form one-magnon set") {
    for (int N : {2, 3, 4}) {
        ModelParams p = make_params(N, 1.1, Branch::Plus);
        SolveReport rep = solve_bethe(1, p, 120);
        auto expect = closed_form_m1(p);
        REQUIRE(rep.converged > 0);
        REQUIRE(rep.solutions.size() == expect.size());
        for (const auto& sol : rep.solutions) {
            bool matched = false;
            for (cd e : expect)
                if (std::abs(sol.roots[0] * sol.roots[0] - e * e) < 1e-7) matched = true;
            REQUIRE(matched);
            REQUIRE(sol.equation_residual < 1e-10);
            REQUIRE(sol.eigen_residual < 1e-8);
            REQUIRE(sol.vector_norm_ratio > 1e-6);
        }
    }
}

TEST_CASE("solver output is deterministic for a fixed configuration") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    SolveReport a = solve_bethe(1, p, 60);
    SolveReport b = solve_bethe(1, p, 60);
    REQUIRE(a.solutions.size() == b.solutions.size());
    for (size_t i = 0; i < a.solutions.size(); ++i) {
        REQUIRE(a.solutions[i].roots[0] == b.solutions[i].roots[0]);
        REQUIRE(a.solutions[i].equation_residual == b.solutions[i].equation_residual);
    }
}

TEST_CASE("two-magnon candidates at three sites are all screened out") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    SolveReport rep = solve_bethe(2, p, 150);
    REQUIRE(rep.converged > 0);
    REQUIRE(rep.solutions.empty());
    REQUIRE(rep.spurious > 0);
}

TEST_CASE("two-magnon solutions at four sites match diagonalization") {
    ModelParams p = make_params(4, 1.1, Branch::Plus);
    SolveReport rep = solve_bethe(2, p, 150);
    REQUIRE(!rep.solutions.empty());
    EdMatch m = verify_against_ed(rep, p);
    REQUIRE(m.n_solutions == static_cast<int>(rep.solutions.size()));
    REQUIRE(m.worst_eigenvalue_gap < 1e-7);
    REQUIRE(m.worst_vector_residual < 1e-7);
}

TEST_CASE("one-magnon solutions sit in the diagonalized spectrum") {
    for (int N : {2, 3}) {
        ModelParams p = make_params(N, 1.1, Branch::Plus);
        SolveReport rep = solve_bethe(1, p, 80);
        EdMatch m = verify_against_ed(rep, p);
        REQUIRE(m.worst_eigenvalue_gap < 1e-7);
        REQUIRE(m.worst_vector_residual < 1e-7);
    }
}

TEST_CASE("string vectors are even in each rapidity") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    BlockCache cache(p);
    std::vector<cd> us = {cd(1.2, 0.3), cd(0.8, -0.2)};
    Vec v1 = bethe_vector(us, cache);
    Vec v2 = bethe_vector({-us[0], us[1]}, cache);
    REQUIRE(rel_residual(v1, v2) < 1e-12);
}

TEST_CASE("candidate eigenvalue derivative agrees with difference quotients") {
    ModelParams p = make_params(3, cd(1.15, 0.07), Branch::Plus);
    Rng rng(p.rng_seed, "eig-jet");
    std::vector<cd> us = {cd(1.25, 0.31), cd(0.83, -0.22)};
    for (int k = 0; k < 5; ++k) {
        cd v = rng.annulus(0.7, 1.4);
        for (int i = 0; i < 2; ++i) {
            std::vector<Jet> jus = {Jet(us[0]), Jet(us[1])};
            jus[i] = Jet::variable(us[i]);
            Jet lam = transfer_eigenvalue_t(Jet(v), jus, p);
            cd fd = oracles::fd_derivative(
                [&](cd x) {
                    auto mod = us;
                    mod[i] = x;
                    return transfer_eigenvalue(v, mod, p);
                },
                us[i]);
            REQUIRE(std::abs(lam.b - fd) / std::max(1.0, std::abs(fd)) < 1e-7);
        }
    }
}

TEST_CASE("admissibility guards flag degenerate configurations") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    std::string why;
    REQUIRE(rapidities_admissible({cd(1.2, 0.3)}, p));
    REQUIRE(!rapidities_admissible({cd(1.2, 0.3), cd(1.2, 0.3)}, p, 1e-6, &why));
    REQUIRE(!why.empty());
    REQUIRE(!rapidities_admissible({cd(1e-9, 0.0)}, p));
    REQUIRE(!rapidities_admissible({cd(1.0, 1e-9)}, p));
    cd upole = cd(1.0) / std::sqrt(p.q);
    REQUIRE(!rapidities_admissible({upole}, p));
    REQUIRE_THROWS_AS(require_admissible({upole}, p), SingularParameter);
}

TEST_CASE("diagonal blocks move through creation strings as expected") {
    for (int N : {2, 3}) {
        ModelParams p = make_params(N, cd(1.1, 0.05), Branch::Plus);
        Rng rng(p.rng_seed, "reorder-test");
        for (int M = 1; M <= (N >= 3 ? 3 : 2); ++M) {
            std::vector<cd> pts;
            for (int tries = 0; tries < 200; ++tries) {
                pts.clear();
                for (int i = 0; i < M + 1; ++i) pts.push_back(rng.annulus(0.7, 1.4));
                if (rapidities_admissible(pts, p, 5e-3)) break;
            }
            cd u = pts[0];
            std::vector<cd> ubar(pts.begin() + 1, pts.end());
            for (DiagonalBlock blk : {DiagonalBlock::A, DiagonalBlock::D})
                for (StringSide side : {StringSide::Creation, StringSide::Annihilation}) {
                    INFO("N=" << N << " M=" << M << " blk=" << (blk == DiagonalBlock::A)
                              << " side=" << (side == StringSide::Creation));
                    REQUIRE(check_string_reordering(u, ubar, blk, side, p) < 1e-10);
                }
        }
    }
}

TEST_CASE("the trace action on a string splits into wanted and unwanted parts") {
    for (int N : {2, 3}) {
        ModelParams p = make_params(N, cd(1.12, 0.04), Branch::Plus);
        Rng rng(p.rng_seed, "offshell-test");
        for (int M = 0; M <= (N >= 3 ? 3 : 2); ++M) {
            std::vector<cd> pts;
            for (int tries = 0; tries < 200; ++tries) {
                pts.clear();
                for (int i = 0; i < M + 1; ++i) pts.push_back(rng.annulus(0.7, 1.4));
                if (rapidities_admissible(pts, p, 5e-3)) break;
            }
            cd u = pts[0];
            std::vector<cd> ubar(pts.begin() + 1, pts.end());
            for (StringSide side : {StringSide::Creation, StringSide::Annihilation}) {
                INFO("N=" << N << " M=" << M << " side=" << (side == StringSide::Creation));
                REQUIRE(check_offshell_action(u, ubar, side, p) < 1e-10);
            }
        }
    }
}

TEST_CASE("root-set comparison is permutation and sign blind") {
    std::vector<cd> a = {cd(1.2, 0.3), cd(0.8, -0.1)};
    std::vector<cd> b = {cd(-0.8, 0.1), cd(1.2, 0.3)};
    std::vector<cd> c = {cd(1.2, 0.3), cd(0.9, -0.1)};
    REQUIRE(tlbethe::detail::same_root_set(a, b, 1e-10));
    REQUIRE(!tlbethe::detail::same_root_set(a, c, 1e-10));
}
