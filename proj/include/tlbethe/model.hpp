#pragma once

#include "tlbethe/types.hpp"

#include <cmath>
#include <vector>

namespace tlbethe {

template <class T>
T omega_t(const T& u) {
    return u - T(1.0) / u;
}

inline cd omega(cd u) {
    if (u == cd(0.0)) throw SingularParameter("u");
    return omega_t(u);
}

enum class Branch { Plus, Minus };

// The deformation parameters satisfy 1 + Q^2 + Q^-2 = -(q + q^-1); q is one
// root of q^2 + c q + 1 = 0 with c the loop weight. Plus picks |q| >= 1,
// ties broken by larger real part, then larger imaginary part.
inline cd derive_q(cd Q, Branch branch) {
    if (Q == cd(0.0)) throw std::invalid_argument("Q must be nonzero");
    cd c = 1.0 + Q * Q + 1.0 / (Q * Q);
    cd disc = std::sqrt(c * c - 4.0);
    cd r1 = (-c + disc) / 2.0;
    cd r2 = (-c - disc) / 2.0;
    auto outranks = [](cd a, cd b) {
        if (std::abs(std::abs(a) - std::abs(b)) > 1e-12) return std::abs(a) > std::abs(b);
        if (std::abs(a.real() - b.real()) > 1e-12) return a.real() > b.real();
        return a.imag() > b.imag();
    };
    cd hi = outranks(r1, r2) ? r1 : r2;
    cd lo = (hi == r1) ? r2 : r1;
    return branch == Branch::Plus ? hi : lo;
}

struct ModelParams {
    int N = 3;
    cd Q{1.1, 0.0};
    Branch branch = Branch::Plus;
    cd q;
    double tol_identity = 1e-9;
    double tol_derivative = 1e-5;
    std::uint64_t rng_seed = 12345;

    cd loop_weight() const { return 1.0 + Q * Q + 1.0 / (Q * Q); }
    Eigen::Index dim() const {
        Eigen::Index d = 1;
        for (int i = 0; i < N; ++i) d *= 3;
        return d;
    }
    bool dense_regime() const { return dim() < 1000; }
};

inline ModelParams make_params(int N, cd Q, Branch branch = Branch::Plus,
                               std::uint64_t rng_seed = 12345) {
    if (N < 1) throw std::invalid_argument("N must be positive");
    if (Q == cd(0.0)) throw std::invalid_argument("Q must be nonzero");
    ModelParams p;
    p.N = N;
    p.Q = Q;
    p.branch = branch;
    p.q = derive_q(Q, branch);
    p.rng_seed = rng_seed;
    if (std::abs(omega(p.q)) < 1e-12)
        throw std::invalid_argument("degenerate deformation: q = +-1");
    cd rel = p.loop_weight() + p.q + 1.0 / p.q;
    if (std::abs(rel) > 1e-10 * std::max(1.0, std::abs(p.loop_weight())))
        throw std::logic_error("q does not satisfy the loop-weight relation");
    return p;
}

// Two-site generator on the spin-1 pair space, basis m = -1, 0, +1 at each
// site (index m+1), pair index 3*m1 + m2. Nonzero block on rows/columns
// {2, 4, 6}: the total-weight-zero pair states.
inline Mat build_X(const ModelParams& p) {
    cd Q = p.Q;
    Mat X = Mat::Zero(9, 9);
    X(2, 2) = 1.0 / (Q * Q);
    X(2, 4) = -1.0 / Q;
    X(2, 6) = 1.0;
    X(4, 2) = -1.0 / Q;
    X(4, 4) = 1.0;
    X(4, 6) = -Q;
    X(6, 2) = 1.0;
    X(6, 4) = -Q;
    X(6, 6) = Q * Q;
    return X;
}

// Same generator from the weight-sum form: entry <m1 m2|X|m1' m2'> =
// (-1)^(m1-m1') Q^(m1+m1') on total weight zero, all other entries zero.
inline Mat build_X_from_weights(const ModelParams& p) {
    Mat X = Mat::Zero(9, 9);
    for (int m1 = -1; m1 <= 1; ++m1)
        for (int m2 = -1; m2 <= 1; ++m2)
            for (int n1 = -1; n1 <= 1; ++n1)
                for (int n2 = -1; n2 <= 1; ++n2) {
                    if (m1 + m2 != 0 || n1 + n2 != 0) continue;
                    int r = 3 * (m1 + 1) + (m2 + 1);
                    int c = 3 * (n1 + 1) + (n2 + 1);
                    double sign = ((m1 - n1) % 2 == 0) ? 1.0 : -1.0;
                    X(r, c) = sign * std::pow(p.Q, cd(m1 + n1));
                }
    return X;
}

// Independent two-site construction for the undeformed point: the square of
// the spin-1 Heisenberg coupling minus the identity. Basis is ascending
// magnetization on each site.
inline Mat build_biquadratic_generator() {
    Mat sz = Mat::Zero(3, 3), sp = Mat::Zero(3, 3);
    sz(0, 0) = -1.0;
    sz(2, 2) = 1.0;
    sp(1, 0) = std::sqrt(2.0);
    sp(2, 1) = std::sqrt(2.0);
    Mat sm = sp.adjoint();
    Mat sx = (sp + sm) / 2.0;
    Mat sy = (sp - sm) / cd(0.0, 2.0);
    Mat ss = Mat::Zero(9, 9);
    for (const Mat* s : {&sx, &sy, &sz}) {
        Mat k(9, 9);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) k.block(3 * i, 3 * j, 3, 3) = (*s)(i, j) * (*s);
        ss += k;
    }
    return ss * ss - Mat::Identity(9, 9);
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// I^(i-1) (x) X (x) I^(N-i-1), two-site X placed on sites i, i+1 (1-based).
inline QOperator embed_generator(int i, const ModelParams& p) {
    if (i < 1 || i > p.N - 1) throw std::out_of_range("site index");
    Mat X = build_X(p);
    Eigen::Index left = 1, right = 1;
    for (int k = 1; k < i; ++k) left *= 3;
    for (int k = i + 1; k < p.N; ++k) right *= 3;
    Eigen::Index dim = left * 9 * right;
    if (p.dense_regime()) {
        Mat out = kron(kron(Mat::Identity(left, left), X), Mat::Identity(right, right));
        return QOperator::dense(std::move(out));
    }
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(static_cast<size_t>(9 * left * right));
    for (Eigen::Index L = 0; L < left; ++L)
        for (int r = 0; r < 9; ++r)
            for (int c = 0; c < 9; ++c) {
                if (X(r, c) == cd(0.0)) continue;
                for (Eigen::Index Rt = 0; Rt < right; ++Rt)
                    trip.emplace_back((L * 9 + r) * right + Rt, (L * 9 + c) * right + Rt,
                                      X(r, c));
            }
    SpMat out(dim, dim);
    out.setFromTriplets(trip.begin(), trip.end());
    return QOperator::sparse(std::move(out));
}

inline QOperator build_hamiltonian(const ModelParams& p) {
    if (p.N < 2) throw std::invalid_argument("need at least two sites");
    QOperator h = embed_generator(1, p);
    for (int i = 2; i <= p.N - 1; ++i) h = h + embed_generator(i, p);
    return h;
}

struct TlReport {
    double idempotency = 0;   // X_i^2 = c X_i
    double absorption = 0;    // X_i X_{i+-1} X_i = X_i
    double distant = 0;       // [X_i, X_j] = 0 for |i-j| > 1
    double worst() const { return std::max({idempotency, absorption, distant}); }
    bool pass(double tol) const { return worst() < tol; }
};

inline TlReport check_tl_relations(const ModelParams& p) {
    if (p.N < 3) throw std::invalid_argument("relations need N >= 3");
    cd c = p.loop_weight();
    TlReport rep;
    std::vector<QOperator> gen;
    for (int i = 1; i <= p.N - 1; ++i) gen.push_back(embed_generator(i, p));
    auto rres = [](const QOperator& l, const QOperator& r) {
        double ln = l.norm(), rn = r.norm();
        return (l - r).norm() / std::max({ln, rn, 1.0});
    };
    for (int i = 0; i < p.N - 1; ++i) {
        rep.idempotency = std::max(rep.idempotency, rres(gen[i] * gen[i], c * gen[i]));
        if (i + 1 < p.N - 1) {
            rep.absorption =
                std::max(rep.absorption, rres(gen[i] * gen[i + 1] * gen[i], gen[i]));
            rep.absorption =
                std::max(rep.absorption, rres(gen[i + 1] * gen[i] * gen[i + 1], gen[i + 1]));
        }
        for (int j = i + 2; j < p.N - 1; ++j)
            rep.distant = std::max(rep.distant, rres(gen[i] * gen[j], gen[j] * gen[i]));
    }
    return rep;
}

}  // namespace tlbethe
