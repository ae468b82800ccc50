#pragma once

#include <array>
#include <utility>
#include <vector>

#include "tlbethe/coefficients.hpp"
#include "tlbethe/lax.hpp"
#include "tlbethe/model.hpp"

namespace tlbethe {

// 3x3 auxiliary-space matrix whose entries are operators on the chain space
using OpMat3 = std::array<std::array<Mat, 3>, 3>;

namespace detail {

inline void require_dense_chain(const ModelParams& p) {
    if (p.dim() > 3000)
        throw std::invalid_argument("double-row construction is dense; chain too long");
}

inline OpMat3 op3_zero(Eigen::Index dim) {
    OpMat3 out;
    for (auto& row : out)
        for (auto& m : row) m = Mat::Zero(dim, dim);
    return out;
}

inline OpMat3 op3_identity(Eigen::Index dim) {
    OpMat3 out = op3_zero(dim);
    for (int a = 0; a < 3; ++a) out[a][a] = Mat::Identity(dim, dim);
    return out;
}

// local factor of the first-row product: auxiliary indices fixed, site indices free
inline Eigen::Matrix3cd aux_first_block(const Mat& R9, int a, int b) {
    return R9.block(3 * a, 3 * b, 3, 3);
}

// local factor of the returning row: site indices slow, auxiliary indices fast
inline Eigen::Matrix3cd aux_second_block(const Mat& R9, int a, int b) {
    Eigen::Matrix3cd m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = R9(3 * i + a, 3 * j + b);
    return m;
}

}  // namespace detail

// A * (local operator at `site`), never forming the embedded big matrix.
// Site 1 is the slowest tensor factor.
inline Mat rmul_site(const Mat& A, const Eigen::Matrix3cd& m, int site, int N) {
    Eigen::Index d2 = 1;
    for (int i = 0; i < N - site; ++i) d2 *= 3;
    Eigen::Index d1 = 1;
    for (int i = 0; i < site - 1; ++i) d1 *= 3;
    Mat out = Mat::Zero(A.rows(), A.cols());
    for (Eigen::Index blk = 0; blk < d1; ++blk) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                cd w = m(a, b);
                if (w == cd(0.0)) continue;
                out.middleCols((blk * 3 + b) * d2, d2) +=
                    w * A.middleCols((blk * 3 + a) * d2, d2);
            }
        }
    }
    return out;
}

// Single-row operator matrices: the outgoing row multiplies local factors from
// site N down to 1, the returning row from site 1 up to N. When `derivative`
// is non-null the product rule is threaded through the same sweep.
inline OpMat3 build_single_row(cd u, const ModelParams& p, bool returning,
                               OpMat3* derivative = nullptr) {
    detail::require_dense_chain(p);
    const Eigen::Index dim = p.dim();
    Mat R9 = build_R(u, p).matrix;
    Mat dR9 = derivative ? build_R_derivative(u, p) : Mat();

    OpMat3 T = detail::op3_identity(dim);
    OpMat3 Td = detail::op3_zero(dim);

    auto local = [&](const Mat& src, int a, int b) {
        return returning ? detail::aux_second_block(src, a, b)
                         : detail::aux_first_block(src, a, b);
    };

    std::vector<int> sites;
    if (returning)
        for (int s = 1; s <= p.N; ++s) sites.push_back(s);
    else
        for (int s = p.N; s >= 1; --s) sites.push_back(s);

    for (int site : sites) {
        OpMat3 Tn = detail::op3_zero(dim);
        OpMat3 Tdn = detail::op3_zero(dim);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                for (int c = 0; c < 3; ++c) {
                    Eigen::Matrix3cd blk = local(R9, c, b);
                    Tn[a][b] += rmul_site(T[a][c], blk, site, p.N);
                    if (derivative) {
                        Tdn[a][b] += rmul_site(Td[a][c], blk, site, p.N);
                        Tdn[a][b] += rmul_site(T[a][c], local(dR9, c, b), site, p.N);
                    }
                }
            }
        }
        T = std::move(Tn);
        if (derivative) Td = std::move(Tdn);
    }
    if (derivative) *derivative = std::move(Td);
    return T;
}

inline OpMat3 build_T(cd u, const ModelParams& p) { return build_single_row(u, p, false); }
inline OpMat3 build_That(cd u, const ModelParams& p) { return build_single_row(u, p, true); }

inline OpMat3 build_U(cd u, const ModelParams& p) {
    OpMat3 T = build_T(u, p);
    OpMat3 Th = build_That(u, p);
    OpMat3 U = detail::op3_zero(p.dim());
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) U[a][b] += T[a][c] * Th[c][b];
    return U;
}

// The two single rows kept uncontracted. Applying a double-row entry to a
// vector this way costs matrix-vector products only, which is what makes the
// larger chains affordable.
struct RowPair {
    OpMat3 out, back;
};

inline RowPair build_row_pair(cd u, const ModelParams& p) {
    return {build_T(u, p), build_That(u, p)};
}

inline Vec apply_u_entry(const RowPair& r, int a, int b, const Vec& x) {
    Vec acc = Vec::Zero(x.size());
    for (int k = 0; k < 3; ++k) acc += r.out[a][k] * (r.back[k][b] * x);
    return acc;
}

inline RowVec apply_u_entry_left(const RowPair& r, int a, int b, const RowVec& x) {
    RowVec acc = RowVec::Zero(x.size());
    for (int k = 0; k < 3; ++k) acc += (x * r.out[a][k]) * r.back[k][b];
    return acc;
}

// one double-row entry as a dense matrix: three products instead of nine
inline Mat u_entry_dense(const RowPair& r, int a, int b) {
    Mat acc = r.out[a][0] * r.back[0][b];
    for (int k = 1; k < 3; ++k) acc += r.out[a][k] * r.back[k][b];
    return acc;
}

// Operator content of the double-row matrix in the basis where the reference
// state is a joint eigenvector of the diagonal entries. The central and lowest
// diagonal blocks are shifted so that they annihilate the reference state up
// to the expected scalar.
struct DoubleRowBlocks {
    Mat A, B, B1, B2, C, C1, C2, D, E;
};

inline DoubleRowBlocks from_U(const OpMat3& U, cd u, const ModelParams& p) {
    DoubleRowBlocks b;
    cd yv = coeff::y(u, p);
    b.A = U[0][0];
    b.B1 = U[0][1];
    b.B = U[0][2];
    b.C1 = U[1][0];
    b.E = U[1][1] - U[0][0];
    b.B2 = U[1][2];
    b.C = U[2][0];
    b.C2 = U[2][1];
    b.D = U[2][2] - yv * U[0][0];
    return b;
}

inline DoubleRowBlocks build_blocks(cd u, const ModelParams& p) {
    return from_U(build_U(u, p), u, p);
}

inline Vec reference_state(const ModelParams& p) {
    Vec v = Vec::Zero(p.dim());
    v(0) = 1.0;
    return v;
}

// t(u) = tr0[ M0 U0(u) ] with M = diag(Q^-2, 1, Q^2)
inline Mat transfer_matrix_from_U(const OpMat3& U, const ModelParams& p) {
    cd Q2 = p.Q * p.Q;
    return U[0][0] / Q2 + U[1][1] + Q2 * U[2][2];
}

inline Mat transfer_matrix(cd u, const ModelParams& p) {
    RowPair r = build_row_pair(u, p);
    const cd Q2 = p.Q * p.Q;
    const cd w[3] = {1.0 / Q2, 1.0, Q2};
    Mat t = Mat::Zero(p.dim(), p.dim());
    for (int a = 0; a < 3; ++a) t += w[a] * u_entry_dense(r, a, a);
    return t;
}

// same trace rewritten through the shifted blocks
inline Mat transfer_matrix_from_blocks(const DoubleRowBlocks& b, cd u, const ModelParams& p) {
    return coeff::a(u, p) * b.A + p.Q * p.Q * b.D + b.E;
}

// ---------------------------------------------------------------------------
// joint-space checks (two auxiliary spaces tensored with the chain)
// ---------------------------------------------------------------------------
namespace detail {

// operator acting in the first auxiliary slot: sum_ab e_ab (x) I3 (x) T[a][b]
inline Mat on_aux1(const OpMat3& T, Eigen::Index dim) {
    Mat out = Mat::Zero(9 * dim, 9 * dim);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int k = 0; k < 3; ++k)
                out.block((3 * a + k) * dim, (3 * b + k) * dim, dim, dim) = T[a][b];
    return out;
}

inline Mat on_aux2(const OpMat3& T, Eigen::Index dim) {
    Mat out = Mat::Zero(9 * dim, 9 * dim);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int k = 0; k < 3; ++k)
                out.block((3 * k + a) * dim, (3 * k + b) * dim, dim, dim) = T[a][b];
    return out;
}

// scalar 9x9 matrix on the two auxiliary slots, identity on the chain
inline Mat on_aux_pair(const Mat& r9, Eigen::Index dim) {
    Mat out = Mat::Zero(9 * dim, 9 * dim);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
            if (r9(i, j) == cd(0.0)) continue;
            out.block(i * dim, j * dim, dim, dim) =
                r9(i, j) * Mat::Identity(dim, dim);
        }
    return out;
}

inline Mat swap_aux(const ModelParams& p) {
    Mat P = build_P();
    return on_aux_pair(P, p.dim());
}

}  // namespace detail

// R12(u/v) T1(u) T2(v) = T2(v) T1(u) R12(u/v)
inline double check_rtt(cd u, cd v, const ModelParams& p) {
    const Eigen::Index dim = p.dim();
    Mat R = detail::on_aux_pair(build_R(u / v, p).matrix, dim);
    Mat T1 = detail::on_aux1(build_T(u, p), dim);
    Mat T2 = detail::on_aux2(build_T(v, p), dim);
    return rel_residual(R * T1 * T2, T2 * T1 * R);
}

// R12(u/v) U1(u) R21(uv) U2(v) = U2(v) R12(uv) U1(u) R21(u/v)
inline double check_reflection_equation(cd u, cd v, const ModelParams& p) {
    const Eigen::Index dim = p.dim();
    Mat P = build_P();
    auto R12 = [&](cd x) { return detail::on_aux_pair(build_R(x, p).matrix, dim); };
    auto R21 = [&](cd x) {
        Mat r = build_R(x, p).matrix;
        return detail::on_aux_pair(Mat(P * r * P), dim);
    };
    Mat U1 = detail::on_aux1(build_U(u, p), dim);
    Mat U2 = detail::on_aux2(build_U(v, p), dim);
    Mat lhs = R12(u / v) * U1 * R21(u * v) * U2;
    Mat rhs = U2 * R12(u * v) * U1 * R21(u / v);
    return rel_residual(lhs, rhs);
}

// ---------------------------------------------------------------------------
// vacuum actions and block exchange relations
// ---------------------------------------------------------------------------
inline std::vector<NamedResidual> check_vacuum_actions(cd u, const ModelParams& p) {
    DoubleRowBlocks b = build_blocks(u, p);
    Vec ref = reference_state(p);
    cd L1 = coeff::lambda1(u, p);
    cd L2 = coeff::lambda2(u, p);
    cd dv = coeff::d(u, p);
    cd Qm2 = 1.0 / (p.Q * p.Q);

    auto vec_res = [&](const Mat& op, cd eig) {
        Vec got = op * ref;
        Vec want = eig * ref;
        double scale = std::max({got.norm(), want.norm(), op.norm(), 1.0});
        return (got - want).norm() / scale;
    };
    std::vector<NamedResidual> out;
    out.push_back({"A-on-vacuum", vec_res(b.A, L1)});
    out.push_back({"D-on-vacuum", vec_res(b.D, Qm2 * dv * L2)});
    out.push_back({"E-annihilates-vacuum", vec_res(b.E, 0.0)});
    out.push_back({"C-annihilates-vacuum", vec_res(b.C, 0.0)});
    out.push_back({"C1-annihilates-vacuum", vec_res(b.C1, 0.0)});
    out.push_back({"C2-annihilates-vacuum", vec_res(b.C2, 0.0)});
    out.push_back({"B1-annihilates-vacuum", vec_res(b.B1, 0.0)});
    return out;
}

// The ten two-point block relations: how the diagonal blocks move through a
// creation block, their duals for the annihilation block, and the mutual
// commutation of the creation family (and of the annihilation family).
inline std::vector<NamedResidual> check_exchange_relations(cd u, cd v, const ModelParams& p) {
    DoubleRowBlocks bu = build_blocks(u, p);
    DoubleRowBlocks bv = build_blocks(v, p);
    cd au = coeff::a(u, p);
    cd Qm2 = 1.0 / (p.Q * p.Q);
    using coeff::f;
    using coeff::f1;
    using coeff::f2;
    using coeff::f3;
    using coeff::h;
    using coeff::h1;
    using coeff::h2;
    using coeff::h3;

    std::vector<NamedResidual> out;
    out.push_back({"A-through-B",
                   rel_residual(bu.A * bv.B,
                                f(u, v, p) * bv.B * bu.A + f1(u, v, p) * bu.B * bv.A +
                                    f2(u, v, p) * bu.B * bv.D + f3(u, v, p) * bu.B * bv.E -
                                    bu.B1 * bv.B2)});
    out.push_back({"D-through-B",
                   rel_residual(bu.D * bv.B,
                                h(u, v, p) * bv.B * bu.D + h1(u, v, p) * bu.B * bv.D +
                                    h2(u, v, p) * bu.B * bv.A + h3(u, v, p) * bu.B * bv.E +
                                    Qm2 * au * bu.B1 * bv.B2 - Qm2 * bu.E * bv.B)});
    out.push_back({"B-B-commute", rel_residual(bu.B * bv.B, bv.B * bu.B)});
    out.push_back({"B-B1-commute", rel_residual(bu.B * bv.B1, bv.B * bu.B1)});
    out.push_back({"B-E-commute", rel_residual(bu.B * bv.E, bv.B * bu.E)});
    out.push_back({"C-through-A",
                   rel_residual(bv.C * bu.A,
                                f(u, v, p) * bu.A * bv.C + f1(u, v, p) * bv.A * bu.C +
                                    f2(u, v, p) * bv.D * bu.C + f3(u, v, p) * bv.E * bu.C -
                                    bv.C2 * bu.C1)});
    out.push_back({"C-through-D",
                   rel_residual(bv.C * bu.D,
                                h(u, v, p) * bu.D * bv.C + h1(u, v, p) * bv.D * bu.C +
                                    h2(u, v, p) * bv.A * bu.C + h3(u, v, p) * bv.E * bu.C +
                                    Qm2 * au * bv.C2 * bu.C1 - Qm2 * bv.C * bu.E)});
    out.push_back({"C-C-commute", rel_residual(bv.C * bu.C, bu.C * bv.C)});
    out.push_back({"C1-C-commute", rel_residual(bv.C1 * bu.C, bu.C1 * bv.C)});
    out.push_back({"E-C-commute", rel_residual(bv.E * bu.C, bu.E * bv.C)});
    return out;
}

// ---------------------------------------------------------------------------
// Hamiltonian recovery from the transfer-matrix derivative at u = 1
// ---------------------------------------------------------------------------
inline Mat transfer_derivative_analytic(const ModelParams& p) {
    OpMat3 Td, Thd;
    OpMat3 T = build_single_row(1.0, p, false, &Td);
    OpMat3 Th = build_single_row(1.0, p, true, &Thd);
    const std::array<cd, 3> Mw = {1.0 / (p.Q * p.Q), 1.0, p.Q * p.Q};
    Mat out = Mat::Zero(p.dim(), p.dim());
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c)
            out += Mw[a] * (Td[a][c] * Th[c][a] + T[a][c] * Thd[c][a]);
    return out;
}

inline Mat transfer_derivative_fd(const ModelParams& p, double step) {
    Mat plus = transfer_matrix(cd(1.0 + step), p);
    Mat minus = transfer_matrix(cd(1.0 - step), p);
    return (plus - minus) / (2.0 * step);
}

inline std::pair<cd, cd> hamiltonian_normalization(const ModelParams& p) {
    cd wq = omega(p.q), wq2 = omega(p.q * p.q);
    cd alpha = -1.0 / (4.0 * wq2 * std::pow(wq, 2 * p.N - 2));
    cd beta = wq / wq2 - (0.5 * p.N) * wq2 / wq;
    return {alpha, beta};
}

inline Mat hamiltonian_from_transfer(const ModelParams& p) {
    auto [alpha, beta] = hamiltonian_normalization(p);
    return alpha * transfer_derivative_analytic(p) +
           beta * Mat::Identity(p.dim(), p.dim());
}

inline Mat hamiltonian_from_transfer_fd(const ModelParams& p, double step = 1e-5) {
    auto [alpha, beta] = hamiltonian_normalization(p);
    return alpha * transfer_derivative_fd(p, step) + beta * Mat::Identity(p.dim(), p.dim());
}

}  // namespace tlbethe
