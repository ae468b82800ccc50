#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tlbethe/scalar_product.hpp"

using namespace tlbethe;

namespace {

std::vector<cd> draw_free_set(Rng& rng, const std::vector<cd>& fixed, const ModelParams& p,
                              int n) {
    for (int tries = 0; tries < 300; ++tries) {
        std::vector<cd> vs;
        for (int i = 0; i < n; ++i) vs.push_back(rng.annulus(0.7, 1.4));
        std::vector<cd> joint = fixed;
        joint.insert(joint.end(), vs.begin(), vs.end());
        if (rapidities_admissible(joint, p, 5e-3)) return vs;
    }
    throw std::runtime_error("no free draw");
}

}  // namespace

TEST_CASE("determinant overlap matches the assembled product for one magnon") {
    for (int N : {2, 3, 4}) {
        ModelParams p = make_params(N, 1.1, Branch::Plus);
        Rng rng(p.rng_seed, "slavnov-m1");
        for (cd u : closed_form_m1(p)) {
            std::vector<cd> us = {u};
            BlockCache cache(p);
            for (int k = 0; k < 3; ++k) {
                auto vs = draw_free_set(rng, us, p, 1);
                SlavnovResult sr = slavnov_scalar_product(us, vs, p);
                cd direct = direct_scalar_product(us, vs, cache);
                double rel =
                    std::abs(sr.value - direct) / std::max(std::abs(sr.value), std::abs(direct));
                INFO("N=" << N << " cond=" << sr.cauchy_condition);
                REQUIRE(rel < 1e-8);
            }
        }
    }
}

TEST_CASE("determinant overlap matches the assembled product for two magnons") {
    ModelParams p = make_params(4, 1.1, Branch::Plus);
    SolveReport rep = solve_bethe(2, p, 150);
    REQUIRE(!rep.solutions.empty());
    Rng rng(p.rng_seed, "slavnov-m2");
    for (const auto& sol : rep.solutions) {
        BlockCache cache(p);
        for (int k = 0; k < 2; ++k) {
            auto vs = draw_free_set(rng, sol.roots, p, 2);
            SlavnovResult sr = slavnov_scalar_product(sol.roots, vs, p);
            cd direct = direct_scalar_product(sol.roots, vs, cache);
            double rel =
                std::abs(sr.value - direct) / std::max(std::abs(sr.value), std::abs(direct));
            INFO("cond=" << sr.cauchy_condition);
            if (sr.cauchy_condition < 1e10) REQUIRE(rel < 1e-6);
        }
    }
}

TEST_CASE("off-shell left sets are refused") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    REQUIRE_THROWS_AS(slavnov_scalar_product({cd(1.21, 0.33)}, {cd(0.9, 0.1)}, p),
                      std::invalid_argument);
}

TEST_CASE("annihilation-creation reordering holds and detects weight tampering") {
    ModelParams p = make_params(3, cd(1.12, 0.06), Branch::Plus);
    Rng rng(p.rng_seed, "cb");
    for (int k = 0; k < 4; ++k) {
        auto pts = draw_free_set(rng, {}, p, 2);
        REQUIRE(check_cb_relation(pts[0], pts[1], p) < 1e-10);
        REQUIRE(check_cb_relation(pts[0], pts[1], p, cd(1e-3)) > 1e-6);
    }
}

TEST_CASE("vacuum expectation expansion holds and needs the pair term") {
    ModelParams p = make_params(3, cd(1.08, 0.04), Branch::Plus);
    Rng rng(p.rng_seed, "m1x");
    for (int k = 0; k < 4; ++k) {
        auto pts = draw_free_set(rng, {}, p, 2);
        REQUIRE(check_m1_expansion(pts[0], pts[1], p) < 1e-10);
        REQUIRE(check_m1_expansion(pts[0], pts[1], p, true) > 1e-4);
    }
}

TEST_CASE("wide annihilation block kills the vacuum only on shell") {
    for (int N : {2, 3, 4}) {
        ModelParams p = make_params(N, 1.1, Branch::Plus);
        for (cd u : closed_form_m1(p)) REQUIRE(c2_annihilation_ratio(u, p) < 1e-8);
        REQUIRE(c2_annihilation_ratio(cd(1.27, 0.35), p) > 1e-3);
    }
}

TEST_CASE("mismatched set sizes are rejected") {
    ModelParams p = make_params(2, 1.1, Branch::Plus);
    REQUIRE_THROWS_AS(direct_scalar_product({cd(1.2, 0.3)}, {}, p), std::invalid_argument);
}
