#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlbethe {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cd>;

// Linear operator on the 3^N quantum space. Dense backing below dim 1000,
// sparse above (sparse is only exercised by Hamiltonian-level work).
class QOperator {
public:
    QOperator() : dim_(0), sparse_(false) {}

    static QOperator dense(Mat m) {
        QOperator op;
        op.dim_ = m.rows();
        op.sparse_ = false;
        op.d_ = std::move(m);
        return op;
    }
    static QOperator sparse(SpMat m) {
        QOperator op;
        op.dim_ = m.rows();
        op.sparse_ = true;
        op.s_ = std::move(m);
        return op;
    }
    static QOperator zero(Eigen::Index dim, bool sparse = false) {
        if (sparse) return QOperator::sparse(SpMat(dim, dim));
        return dense(Mat::Zero(dim, dim));
    }
    static QOperator identity(Eigen::Index dim, bool sparse = false) {
        if (sparse) {
            SpMat m(dim, dim);
            m.setIdentity();
            return QOperator::sparse(std::move(m));
        }
        return dense(Mat::Identity(dim, dim));
    }

    Eigen::Index dim() const { return dim_; }
    bool is_sparse() const { return sparse_; }

    const Mat& mat() const {
        if (sparse_) throw std::logic_error("QOperator: dense access on sparse storage");
        return d_;
    }
    const SpMat& sp() const {
        if (!sparse_) throw std::logic_error("QOperator: sparse access on dense storage");
        return s_;
    }
    Mat to_dense() const { return sparse_ ? Mat(s_) : d_; }

    QOperator operator+(const QOperator& o) const {
        if (sparse_ && o.sparse_) return QOperator::sparse(s_ + o.s_);
        return dense(to_dense() + o.to_dense());
    }
    QOperator operator-(const QOperator& o) const {
        if (sparse_ && o.sparse_) return QOperator::sparse(s_ - o.s_);
        return dense(to_dense() - o.to_dense());
    }
    QOperator operator*(const QOperator& o) const {
        if (sparse_ && o.sparse_) return QOperator::sparse(SpMat(s_ * o.s_));
        return dense(to_dense() * o.to_dense());
    }
    friend QOperator operator*(cd a, const QOperator& o) {
        if (o.sparse_) return QOperator::sparse(SpMat(a * o.s_));
        return dense(a * o.d_);
    }
    QOperator adjoint() const {
        if (sparse_) return QOperator::sparse(SpMat(s_.adjoint()));
        return dense(d_.adjoint());
    }
    Vec apply(const Vec& v) const { return sparse_ ? Vec(s_ * v) : Vec(d_ * v); }
    Vec apply_left(const Vec& v) const {
        return sparse_ ? Vec(s_.transpose() * v) : Vec(d_.transpose() * v);
    }
    double norm() const { return sparse_ ? s_.norm() : d_.norm(); }

private:
    Eigen::Index dim_;
    bool sparse_;
    Mat d_;
    SpMat s_;
};

// deviation between two arrays of any shape, scaled by the larger magnitude
template <class L, class R>
double rel_residual(const Eigen::MatrixBase<L>& lhs, const Eigen::MatrixBase<R>& rhs) {
    const double ln = lhs.norm(), rn = rhs.norm();
    return (lhs - rhs).norm() / std::max({ln, rn, 1.0});
}
inline double rel_residual(cd lhs, cd rhs) {
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

// Deterministic per-check RNG: a fixed global seed combined with the check
// name, so independent checks stay reproducible regardless of run order.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class Rng {
public:
    Rng(std::uint64_t seed, const std::string& stream) : eng_(seed ^ fnv1a(stream)) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }
    // log-uniform modulus on [lo, hi], uniform argument
    cd annulus(double lo, double hi) {
        double m = std::exp(uniform(std::log(lo), std::log(hi)));
        double ph = uniform(0.0, 2.0 * M_PI);
        return std::polar(m, ph);
    }

private:
    std::mt19937_64 eng_;
};

using RowVec = Eigen::Matrix<std::complex<double>, 1, Eigen::Dynamic>;

// one named residual from a relation check
struct NamedResidual {
    std::string name;
    double residual;
};

inline double max_residual(const std::vector<NamedResidual>& items) {
    double m = 0.0;
    for (const auto& it : items) m = std::max(m, it.residual);
    return m;
}

struct SingularParameter : std::runtime_error {
    explicit SingularParameter(const std::string& factor)
        : std::runtime_error("singular parameter: vanishing factor " + factor) {}
};

}  // namespace tlbethe
