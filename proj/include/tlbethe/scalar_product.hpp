#pragma once

#include <vector>

#include "tlbethe/bethe.hpp"

namespace tlbethe {

// <0| C(u_M)...C(u_1) B(v_1)...B(v_M) |0> assembled by brute force
inline cd direct_scalar_product(const std::vector<cd>& us, const std::vector<cd>& vs,
                                BlockCache& cache) {
    if (us.size() != vs.size())
        throw std::invalid_argument("scalar product needs equally long rapidity sets");
    RowVec bra = dual_bethe_vector(us, cache);
    Vec ket = bethe_vector(vs, cache);
    return (bra * ket)(0);
}

inline cd direct_scalar_product(const std::vector<cd>& us, const std::vector<cd>& vs,
                                const ModelParams& p) {
    BlockCache cache(p);
    return direct_scalar_product(us, vs, cache);
}

// ---------------------------------------------------------------------------
// determinant form of the on-shell/off-shell overlap
// ---------------------------------------------------------------------------
struct SlavnovResult {
    cd value;
    double cauchy_condition;  // conditioning of the kernel determinant
};

// On-shell u-set against a free v-set. The u-derivatives of the candidate
// eigenvalue at the v-points feed the numerator determinant; the denominator
// is the two-point kernel determinant whose conditioning is reported.
inline SlavnovResult slavnov_scalar_product(const std::vector<cd>& us,
                                            const std::vector<cd>& vs, const ModelParams& p,
                                            bool verify_on_shell = true) {
    const int M = static_cast<int>(us.size());
    if (static_cast<int>(vs.size()) != M)
        throw std::invalid_argument("scalar product needs equally long rapidity sets");
    if (M == 0) return {cd(1.0), 1.0};

    for (int i = 0; i < M; ++i) {
        if (std::abs(omega(p.q * us[i] * us[i])) < 1e-8)
            throw SingularParameter("omega(q*u_i^2)");
        if (std::abs(omega(p.q * p.q * vs[i] * vs[i])) < 1e-8)
            throw SingularParameter("omega(q^2*v_i^2)");
        for (int j = 0; j < M; ++j) {
            if (std::abs(omega(vs[i] / us[j])) < 1e-8) throw SingularParameter("omega(v_i/u_j)");
            if (std::abs(omega(p.q * vs[i] * us[j])) < 1e-8)
                throw SingularParameter("omega(q*v_i*u_j)");
            if (j < i && std::abs(omega(us[i] * us[j])) < 1e-8)
                throw SingularParameter("omega(u_i*u_j)");
        }
    }
    if (verify_on_shell && bethe_residual(us, p) > 1e-6)
        throw std::invalid_argument("u-set does not solve the Bethe equations");

    cd pref = std::pow(1.0 / (2.0 * p.Q * p.Q), M);
    for (int i = 0; i < M; ++i) {
        pref *= std::pow(omega(us[i]), 2 * p.N) * us[i] * omega(us[i] * us[i]) /
                (omega(us[i] * us[i] * p.q) * omega(vs[i] * vs[i] * p.q * p.q));
        for (int j = 0; j < i; ++j)
            pref *= omega(us[i] * us[j] * p.q * p.q) / omega(us[i] * us[j]);
    }

    Mat jac(M, M);
    for (int i = 0; i < M; ++i) {
        std::vector<Jet> usj;
        usj.reserve(M);
        for (int k = 0; k < M; ++k)
            usj.push_back(k == i ? Jet::variable(us[k]) : Jet(us[k]));
        for (int j = 0; j < M; ++j)
            jac(i, j) = transfer_eigenvalue_t(Jet(vs[j]), usj, p).b;
    }

    Mat kernel(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            kernel(i, j) = 1.0 / (omega(vs[i] / us[j]) * omega(vs[i] * us[j] * p.q));

    Eigen::JacobiSVD<Mat> svd(kernel);
    double cond = svd.singularValues()(0) / svd.singularValues()(M - 1);
    cd value = pref * jac.determinant() / kernel.determinant();
    return {value, cond};
}

// ---------------------------------------------------------------------------
// single-exchange identities feeding the overlap
// ---------------------------------------------------------------------------

// Moving one annihilation block through one creation block. `x6_shift`
// exists for sensitivity tests: any nonzero shift must break the identity.
inline double check_cb_relation(cd u, cd v, const ModelParams& p, cd x6_shift = 0.0) {
    BlockCache cache(p);
    const DoubleRowBlocks& bu = cache.at(u);
    const DoubleRowBlocks& bv = cache.at(v);
    coeff::CbWeights w = coeff::cb_weights(u, v, p);
    w.x6 += x6_shift;
    Mat lhs = bu.C * bv.B;
    Mat rhs = bv.B * bu.C + w.x1 * bu.A * bv.A + w.x2 * bv.A * bu.A + w.x3 * bu.D * bv.A +
              w.x4 * bu.A * bv.D + w.x5 * bv.A * bu.D + w.x6 * bu.D * bv.D +
              w.y1 * bv.A * bu.E + w.y2 * bu.E * bv.A + w.y3 * bu.E * bv.D +
              bv.B1 * bu.C1 - bu.C2 * bv.B2;
    return rel_residual(lhs, rhs);
}

// Scalar reduction of the one-on-one overlap. The wide-pair expectation value
// has no scalar reduction here and is measured directly; `drop_pair_term`
// exists for sensitivity tests.
inline double check_m1_expansion(cd u, cd v, const ModelParams& p,
                                 bool drop_pair_term = false) {
    BlockCache cache(p);
    const DoubleRowBlocks& bu = cache.at(u);
    const DoubleRowBlocks& bv = cache.at(v);
    Vec ref = reference_state(p);
    coeff::CbWeights w = coeff::cb_weights(u, v, p);
    const cd Q2 = p.Q * p.Q;
    cd L1u = coeff::lambda1(u, p), L2u = coeff::lambda2(u, p);
    cd L1v = coeff::lambda1(v, p), L2v = coeff::lambda2(v, p);

    cd direct = ref.transpose() * (bu.C * (bv.B * ref));
    cd pair = drop_pair_term ? cd(0.0) : cd(ref.transpose() * (bu.C2 * (bv.B2 * ref)));
    cd rhs = (w.x1 + w.x2) * L1u * L1v -
             omega(v * v) * w.x4 / (Q2 * omega(p.q * v * v)) * L1u * L2v -
             omega(u * u) * (w.x3 + w.x5) / (Q2 * omega(p.q * u * u)) * L2u * L1v +
             omega(u * u) * omega(v * v) * w.x6 /
                 (Q2 * Q2 * omega(p.q * u * u) * omega(p.q * v * v)) * L2u * L2v -
             pair;
    return std::abs(direct - rhs) / std::max({std::abs(direct), std::abs(rhs), 1.0});
}

// The wide annihilation block must kill the vacuum from the left on one-magnon
// roots; the ratio against the block norm is returned.
inline double c2_annihilation_ratio(cd u, const ModelParams& p) {
    RowPair r = build_row_pair(u, p);
    Mat c2 = u_entry_dense(r, 2, 1);
    RowVec left = reference_state(p).transpose() * c2;
    return left.norm() / std::max(c2.norm(), 1e-300);
}

}  // namespace tlbethe
