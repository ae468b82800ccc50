#pragma once

#include "tlbethe/model.hpp"

namespace tlbethe {

inline Mat build_P() {
    Mat P = Mat::Zero(9, 9);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) P(3 * a + b, 3 * b + a) = 1.0;
    return P;
}

struct RMatrix {
    cd u;
    Mat matrix;  // 9x9 on the tensor square of a site
};

// R(u) = omega(q u) P + omega(u) P X
inline RMatrix build_R(cd u, const ModelParams& p) {
    if (u == cd(0.0)) throw SingularParameter("u");
    Mat P = build_P();
    Mat PX = P * build_X(p);
    return RMatrix{u, omega(p.q * u) * P + omega(u) * PX};
}

// d/du of build_R, used for the transfer-matrix derivative at u = 1:
// omega(qu)' = q + 1/(q u^2), omega(u)' = 1 + 1/u^2.
inline Mat build_R_derivative(cd u, const ModelParams& p) {
    if (u == cd(0.0)) throw SingularParameter("u");
    Mat P = build_P();
    Mat PX = P * build_X(p);
    cd q = p.q;
    return (q + 1.0 / (q * u * u)) * P + (1.0 + 1.0 / (u * u)) * PX;
}

inline cd zeta(cd u, const ModelParams& p) { return omega(u / p.q) * omega(1.0 / (u * p.q)); }

namespace detail {
// embeddings on the 27-dimensional triple space
inline Mat triple_12(const Mat& r9) { return kron(r9, Mat::Identity(3, 3)); }
inline Mat triple_23(const Mat& r9) { return kron(Mat::Identity(3, 3), r9); }
inline Mat triple_13(const Mat& r9) {
    Mat p23 = kron(Mat::Identity(3, 3), build_P());
    return p23 * triple_12(r9) * p23;
}
}  // namespace detail

// R12(u/v) R13(u) R23(v) = R23(v) R13(u) R12(u/v)
inline double check_yang_baxter(cd u, cd v, const ModelParams& p) {
    Mat r12 = detail::triple_12(build_R(u / v, p).matrix);
    Mat r13 = detail::triple_13(build_R(u, p).matrix);
    Mat r23 = detail::triple_23(build_R(v, p).matrix);
    return rel_residual(r12 * r13 * r23, r23 * r13 * r12);
}

// R12(u) R21(1/u) = zeta(u) I with R21 = P R P
inline double check_unitarity(cd u, const ModelParams& p) {
    Mat P = build_P();
    Mat lhs = build_R(u, p).matrix * (P * build_R(1.0 / u, p).matrix * P);
    Mat rhs = zeta(u, p) * Mat::Identity(9, 9);
    return rel_residual(lhs, rhs);
}

}  // namespace tlbethe
