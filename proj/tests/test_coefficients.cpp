#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tlbethe/coefficients.hpp"

using namespace tlbethe;
using namespace tlbethe::coeff;

namespace {

std::vector<cd> draw_set(Rng& rng, const ModelParams& p, int n) {
    for (int tries = 0; tries < 200; ++tries) {
        std::vector<cd> us;
        for (int i = 0; i < n; ++i) us.push_back(rng.annulus(0.6, 1.6));
        bool ok = true;
        for (size_t i = 0; i < us.size() && ok; ++i)
            for (size_t j = 0; j < us.size() && ok; ++j) {
                if (i == j) continue;
                if (std::abs(omega(us[i] / us[j])) < 1e-2) ok = false;
                if (std::abs(omega(p.q * us[i] * us[j])) < 1e-2) ok = false;
            }
        for (cd u : us)
            if (std::abs(omega(p.q * u * u)) < 1e-2 || std::abs(omega(p.q * p.q * u * u)) < 1e-2)
                ok = false;
        if (ok) return us;
    }
    throw std::runtime_error("no regular draw");
}

}  // namespace

TEST_CASE("exchange weights satisfy the kernel identities") {
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        ModelParams p = make_params(3, cd(1.2, 0.1), br);
        Rng rng(p.rng_seed, "kernel-ids");
        for (int k = 0; k < 20; ++k) {
            auto uv = draw_set(rng, p, 2);
            auto [r1, r2] = kernel_identity_residuals(uv[0], uv[1], p);
            REQUIRE(r1 < 1e-12);
            REQUIRE(r2 < 1e-12);
        }
    }
}

TEST_CASE("string coefficients match the short expansions written out by hand") {
    ModelParams p = make_params(3, cd(1.1, 0.05), Branch::Plus);
    Rng rng(p.rng_seed, "alpha-delta");
    for (int k = 0; k < 10; ++k) {
        auto pts = draw_set(rng, p, 3);
        cd u = pts[0], u1 = pts[1], u2 = pts[2];
        REQUIRE(rel_residual(alpha_coeff(u, {u1}, p), oracles::alpha_m1(u, u1, p)) < 1e-12);
        REQUIRE(rel_residual(delta_coeff(u, {u1}, p), oracles::delta_m1(u, u1, p)) < 1e-12);
        REQUIRE(rel_residual(alpha_coeff(u, {u1, u2}, p), oracles::alpha_m2(u, u1, u2, p)) <
                1e-12);
        REQUIRE(rel_residual(delta_coeff(u, {u1, u2}, p), oracles::delta_m2(u, u1, u2, p)) <
                1e-12);
    }
}

TEST_CASE("resummation weights follow the geometric recursion") {
    ModelParams p = make_params(3, cd(1.3, -0.2), Branch::Plus);
    cd base = (1.0 + p.Q * p.Q) / std::pow(p.Q, 4);
    REQUIRE(rel_residual(r_coeff(0, p), cd(-1.0)) < 1e-14);
    REQUIRE(rel_residual(s_coeff(1, p), 1.0 / (p.Q * p.Q)) < 1e-14);
    for (int i = 0; i < 5; ++i) {
        REQUIRE(rel_residual(r_coeff(i + 1, p), base * r_coeff(i, p)) < 1e-13);
        REQUIRE(rel_residual(s_coeff(i + 2, p), base * s_coeff(i + 1, p)) < 1e-13);
    }
}

TEST_CASE("weight families cancel and collapse for up to four magnons") {
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        ModelParams p = make_params(3, cd(1.15, 0.1), br);
        Rng rng(p.rng_seed, br == Branch::Plus ? "families-p" : "families-m");
        for (int M = 1; M <= 4; ++M) {
            for (int k = 0; k < 6; ++k) {
                auto pts = draw_set(rng, p, M + 2);
                cd u = pts[0], w = pts[1];
                std::vector<cd> ubar(pts.begin() + 2, pts.end());
                auto res = family_identity_residuals(u, ubar, w, p);
                REQUIRE(res.size() == 10);
                for (const auto& r : res) {
                    INFO(r.name << " at M=" << M);
                    REQUIRE(r.residual < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("weight families need at least one string point") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    REQUIRE_THROWS_AS(family_identity_residuals(cd(1.2), {}, cd(0.9), p),
                      std::invalid_argument);
}

TEST_CASE("wide-pair weight sum approaches the resummation constant") {
    ModelParams p = make_params(3, cd(1.1, 0.08), Branch::Plus);
    Rng rng(p.rng_seed, "large-u");
    auto pts = draw_set(rng, p, 4);
    std::vector<cd> ubar(pts.begin(), pts.begin() + 3);
    // the component identity is exact in u, so the limit is reached immediately
    REQUIRE(large_u_b2_residual(ubar, pts[3], p, 1e6) < 1e-6);
    REQUIRE(large_u_b2_residual(ubar, pts[3], p, 1e2) < 1e-6);
}

TEST_CASE("dual-number evaluation reproduces difference quotients") {
    ModelParams p = make_params(3, cd(1.2, 0.1), Branch::Plus);
    Rng rng(p.rng_seed, "jets");
    for (int k = 0; k < 10; ++k) {
        auto uv = draw_set(rng, p, 2);
        Jet uj = Jet::variable(uv[0]);
        Jet vj(uv[1]);

        Jet fj = f(uj, vj, p);
        cd fd = oracles::fd_derivative([&](cd x) { return f(x, uv[1], p); }, uv[0]);
        REQUIRE(std::abs(fj.b - fd) / std::max(1.0, std::abs(fd)) < 1e-7);

        Jet l1 = lambda1(uj, p);
        cd l1fd = oracles::fd_derivative([&](cd x) { return lambda1(x, p); }, uv[0]);
        REQUIRE(std::abs(l1.b - l1fd) / std::max(1.0, std::abs(l1fd)) < 1e-7);

        Jet kj = kernel(uj, vj, p);
        cd kfd = oracles::fd_derivative([&](cd x) { return kernel(x, uv[1], p); }, uv[0]);
        REQUIRE(std::abs(kj.b - kfd) / std::max(1.0, std::abs(kfd)) < 1e-7);
    }
}

TEST_CASE("singular arguments raise typed errors") {
    ModelParams p = make_params(3, 1.1, Branch::Plus);
    cd u(1.2, 0.3);
    REQUIRE_THROWS_AS(f(u, u, p), SingularParameter);          // u/v degenerate
    REQUIRE_THROWS_AS(h(u, u, p), SingularParameter);          // same pole
    REQUIRE_THROWS_AS(lambda1(cd(0.0), p), SingularParameter); // origin
    cd upole = cd(1.0) / std::sqrt(p.q);                       // omega(q u^2) = 0
    REQUIRE_THROWS_AS(a(upole, p), SingularParameter);
    REQUIRE_NOTHROW(f(u, cd(0.8, -0.1), p));
}
