#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tlbethe/lax.hpp"

using namespace tlbethe;

TEST_CASE("vertex weights satisfy the braid-shift identity at random points") {
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        ModelParams p = make_params(2, cd(1.1, 0.2), br);
        Rng rng(p.rng_seed, "ybe");
        for (int k = 0; k < 25; ++k) {
            cd u = rng.annulus(0.5, 2.0), v = rng.annulus(0.5, 2.0);
            if (std::abs(u / v - 1.0) < 1e-3 || std::abs(u * v - 1.0) < 1e-3) continue;
            REQUIRE(check_yang_baxter(u, v, p) < 1e-10);
        }
    }
}

TEST_CASE("inverse at the mirrored argument is the scalar factor") {
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        ModelParams p = make_params(2, 1.3, br);
        Rng rng(p.rng_seed, "unitarity");
        for (int k = 0; k < 25; ++k) {
            REQUIRE(check_unitarity(rng.annulus(0.5, 2.0), p) < 1e-12);
        }
    }
}

TEST_CASE("value at the identity argument is a pure permutation") {
    ModelParams p = make_params(2, 1.1, Branch::Plus);
    Mat r1 = build_R(1.0, p).matrix;
    REQUIRE(rel_residual(r1, omega(p.q) * build_P()) < 1e-14);
}

TEST_CASE("analytic derivative agrees with central differences") {
    ModelParams p = make_params(2, cd(0.9, 0.1), Branch::Plus);
    Rng rng(p.rng_seed, "rd");
    for (int k = 0; k < 8; ++k) {
        cd u = rng.annulus(0.6, 1.5);
        double step = 1e-6;
        Mat fd = (build_R(u + step, p).matrix - build_R(u - step, p).matrix) / (2.0 * step);
        REQUIRE(rel_residual(build_R_derivative(u, p), fd) < 1e-8);
    }
}

TEST_CASE("mismatched spectral arguments are detected") {
    ModelParams p = make_params(2, 1.1, Branch::Plus);
    cd u(1.2, 0.3), v(0.8, -0.2);
    Mat r12 = tlbethe::detail::triple_12(build_R(u / v * 1.01, p).matrix);
    Mat r13 = tlbethe::detail::triple_13(build_R(u, p).matrix);
    Mat r23 = tlbethe::detail::triple_23(build_R(v, p).matrix);
    REQUIRE(rel_residual(r12 * r13 * r23, r23 * r13 * r12) > 1e-4);
}

TEST_CASE("zero spectral argument is rejected") {
    ModelParams p = make_params(2, 1.1, Branch::Plus);
    REQUIRE_THROWS_AS(build_R(0.0, p), SingularParameter);
}
