#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tlbethe/jet.hpp"
#include "tlbethe/model.hpp"

namespace tlbethe {
namespace coeff {

// Evaluation guard: reject arguments that sit on (or numerically at) a zero
// of a denominator factor. Each public function below lists its own factors.
inline constexpr double kGuardEps = 1e-10;

inline cd value_of(cd x) { return x; }
inline cd value_of(const Jet& x) { return x.a; }

inline cd pow_i(cd x, int n) { return std::pow(x, n); }
inline Jet pow_i(const Jet& x, int n) { return pow_int(x, n); }

namespace detail {

struct Factor {
    const char* label;
    cd arg;  // guard fires when omega(arg) ~ 0
};

inline void require_regular(std::initializer_list<Factor> factors) {
    for (const auto& fac : factors) {
        double m = std::abs(fac.arg);
        if (m < kGuardEps || std::abs(fac.arg - 1.0 / fac.arg) < kGuardEps)
            throw SingularParameter(std::string("omega(") + fac.label + ")");
    }
}

}  // namespace detail

// Unguarded cores, templated so dual numbers flow through for derivatives.
namespace raw {

template <class T>
T f(const T& u, const T& v, const ModelParams& p) {
    T q(p.q);
    return omega_t(u / (q * v)) * omega_t(u * v) / (omega_t(u / v) * omega_t(q * u * v));
}

template <class T>
T f1(const T& u, const T& v, const ModelParams& p) {
    T q(p.q), w(1.0 / (p.Q * p.Q));
    return omega_t(v * v) / (omega_t(q * v * v) * omega_t(u / v)) *
           (omega_t(q * v / u) + w * omega_t(v / u));
}

template <class T>
T f2(const T& u, const T& v, const ModelParams& p) {
    T q(p.q), Q2(p.Q * p.Q);
    return T(-1.0) - Q2 * omega_t(u * v) / omega_t(q * u * v);
}

template <class T>
T f3(const T& u, const T& v, const ModelParams& p) {
    T q(p.q);
    return -omega_t(u * v) / omega_t(q * u * v);
}

template <class T>
T h(const T& u, const T& v, const ModelParams& p) {
    T q(p.q);
    return omega_t(u * q / v) * omega_t(q * q * u * v) / (omega_t(u / v) * omega_t(q * u * v));
}

template <class T>
T h1(const T& u, const T& v, const ModelParams& p) {
    T q(p.q), Q2(p.Q * p.Q);
    return omega_t(q * q * u * u) / (Q2 * omega_t(q * u * u) * omega_t(u / v)) *
           ((T(1.0) + T(1.0) / Q2) * omega_t(q * u / v) + omega_t(q * q * u / v));
}

template <class T>
T h2(const T& u, const T& v, const ModelParams& p) {
    T q(p.q), Q2(p.Q * p.Q);
    return omega_t(q * q * u * u) * omega_t(v * v) /
           (Q2 * Q2 * omega_t(q * u * u) * omega_t(q * u * v) * omega_t(q * v * v)) *
           ((T(1.0) + T(1.0) / Q2) * omega_t(q * q * u * v) + omega_t(q * q * q * u * v));
}

template <class T>
T h3(const T& u, const T& v, const ModelParams& p) {
    T q(p.q), Q2(p.Q * p.Q);
    return (q - T(1.0) / q) * omega_t(q * u / v) / (Q2 * omega_t(q * u * u) * omega_t(q * u * v));
}

template <class T>
T a(const T& u, const ModelParams& p) {
    T q(p.q);
    return -omega_t(q * q * u * u) / omega_t(q * u * u);
}

template <class T>
T d(const T& u, const ModelParams& p) {
    T q(p.q);
    return -omega_t(u * u) / omega_t(q * u * u);
}

template <class T>
T y(const T& u, const ModelParams& p) {
    return T(1.0) - d(u, p) / T(p.Q * p.Q);
}

template <class T>
T kernel(const T& u, const T& v, const ModelParams& p) {
    T q(p.q);
    return (q - T(1.0) / q) * omega_t(q * q * u * u) / (omega_t(u / v) * omega_t(q * u * v)) *
           d(v, p);
}

template <class T>
T lambda1(const T& u, const ModelParams& p) {
    return pow_i(omega_t(T(p.q) * u), 2 * p.N);
}

template <class T>
T lambda2(const T& u, const ModelParams& p) {
    return pow_i(omega_t(u), 2 * p.N);
}

}  // namespace raw

template <class T>
T f(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"u/v", uu / vv}, {"q*u*v", p.q * uu * vv}});
    return raw::f(u, v, p);
}

template <class T>
T f1(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"q*v^2", p.q * vv * vv}, {"u/v", uu / vv}});
    return raw::f1(u, v, p);
}

template <class T>
T f2(const T& u, const T& v, const ModelParams& p) {
    detail::require_regular({{"q*u*v", p.q * value_of(u) * value_of(v)}});
    return raw::f2(u, v, p);
}

template <class T>
T f3(const T& u, const T& v, const ModelParams& p) {
    detail::require_regular({{"q*u*v", p.q * value_of(u) * value_of(v)}});
    return raw::f3(u, v, p);
}

template <class T>
T h(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"u/v", uu / vv}, {"q*u*v", p.q * uu * vv}});
    return raw::h(u, v, p);
}

template <class T>
T h1(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"q*u^2", p.q * uu * uu}, {"u/v", uu / vv}});
    return raw::h1(u, v, p);
}

template <class T>
T h2(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"q*u^2", p.q * uu * uu},
                             {"q*u*v", p.q * uu * vv},
                             {"q*v^2", p.q * vv * vv}});
    return raw::h2(u, v, p);
}

template <class T>
T h3(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"q*u^2", p.q * uu * uu}, {"q*u*v", p.q * uu * vv}});
    return raw::h3(u, v, p);
}

template <class T>
T a(const T& u, const ModelParams& p) {
    cd uu = value_of(u);
    detail::require_regular({{"q*u^2", p.q * uu * uu}});
    return raw::a(u, p);
}

template <class T>
T d(const T& u, const ModelParams& p) {
    cd uu = value_of(u);
    detail::require_regular({{"q*u^2", p.q * uu * uu}});
    return raw::d(u, p);
}

template <class T>
T y(const T& u, const ModelParams& p) {
    cd uu = value_of(u);
    detail::require_regular({{"q*u^2", p.q * uu * uu}});
    return raw::y(u, p);
}

template <class T>
T kernel(const T& u, const T& v, const ModelParams& p) {
    cd uu = value_of(u), vv = value_of(v);
    detail::require_regular({{"u/v", uu / vv},
                             {"q*u*v", p.q * uu * vv},
                             {"q*v^2", p.q * vv * vv}});
    return raw::kernel(u, v, p);
}

template <class T>
T lambda1(const T& u, const ModelParams& p) {
    if (std::abs(value_of(u)) < kGuardEps) throw SingularParameter("u");
    return raw::lambda1(u, p);
}

template <class T>
T lambda2(const T& u, const ModelParams& p) {
    if (std::abs(value_of(u)) < kGuardEps) throw SingularParameter("u");
    return raw::lambda2(u, p);
}

// Weights of the unwanted-string resummation. Index 0 is the base case.
inline cd r_coeff(int i, const ModelParams& p) {
    cd base = (1.0 + p.Q * p.Q) / std::pow(p.Q, 4);
    return -std::pow(base, i);
}

inline cd s_coeff(int i, const ModelParams& p) {
    cd base = (1.0 + p.Q * p.Q) / std::pow(p.Q, 4);
    return std::pow(base, i - 1) / (p.Q * p.Q);
}

namespace detail {

// shared nested sum entering both closed-form string coefficients
inline cd string_inner(int i, const std::vector<cd>& ubar, const ModelParams& p) {
    const int M = static_cast<int>(ubar.size());
    cd ui = ubar[i - 1], uM = ubar[M - 1];
    cd inner = 0.0;
    for (int k = 2; k <= i; ++k) {
        cd pf = 1.0, ph = 1.0;
        for (int j = k; j <= M - 1; ++j) {
            if (j == i) continue;
            pf *= f(ui, ubar[j - 1], p);
            ph *= h(ui, ubar[j - 1], p);
        }
        inner += r_coeff(k - 2, p) *
                 (-d(ui, p) / (p.Q * p.Q) * f3(ui, uM, p) * pf + h3(ui, uM, p) * ph);
    }
    return inner;
}

}  // namespace detail

// Closed-form weight of the terminal exchange string in the A-type reordering.
inline cd alpha_coeff(cd u, const std::vector<cd>& ubar, const ModelParams& p) {
    const int M = static_cast<int>(ubar.size());
    if (M < 1) throw std::invalid_argument("alpha_coeff needs at least one rapidity");
    const cd qc = p.q + 1.0 / p.q;
    cd uM = ubar[M - 1];
    cd total = f3(u, uM, p);
    for (int j = 1; j <= M - 1; ++j) total *= f(u, ubar[j - 1], p);
    for (int i = 1; i <= M - 1; ++i) {
        cd ui = ubar[i - 1];
        cd pf = 1.0, ph = 1.0;
        for (int j = 1; j <= M - 1; ++j) {
            if (j == i) continue;
            pf *= f(ui, ubar[j - 1], p);
            ph *= h(ui, ubar[j - 1], p);
        }
        cd t = f1(u, ui, p) * f3(ui, uM, p) * pf + f2(u, ui, p) * h3(ui, uM, p) * ph;
        t += qc * detail::string_inner(i, ubar, p);
        total += t;
    }
    return total;
}

// Companion weight for the D-type reordering.
inline cd delta_coeff(cd u, const std::vector<cd>& ubar, const ModelParams& p) {
    const int M = static_cast<int>(ubar.size());
    if (M < 1) throw std::invalid_argument("delta_coeff needs at least one rapidity");
    const cd qc = p.q + 1.0 / p.q;
    cd uM = ubar[M - 1];
    cd total = h3(u, uM, p);
    for (int j = 1; j <= M - 1; ++j) total *= h(u, ubar[j - 1], p);
    for (int i = 1; i <= M - 1; ++i) {
        cd ui = ubar[i - 1];
        cd pf = 1.0, ph = 1.0;
        for (int j = 1; j <= M - 1; ++j) {
            if (j == i) continue;
            pf *= f(ui, ubar[j - 1], p);
            ph *= h(ui, ubar[j - 1], p);
        }
        cd t = h1(u, ui, p) * h3(ui, uM, p) * ph + h2(u, ui, p) * f3(ui, uM, p) * pf;
        t -= qc / (p.Q * p.Q) * a(u, p) * detail::string_inner(i, ubar, p);
        total += t;
    }
    return total;
}

// Weights for commuting a creation block through an annihilation block.
struct CbWeights {
    cd x1, x2, x3, x4, x5, x6;
    cd y1, y2, y3;
};

inline CbWeights cb_weights(cd u, cd v, const ModelParams& p) {
    detail::require_regular({{"q*u^2", p.q * u * u},
                             {"q*v^2", p.q * v * v},
                             {"u/v", u / v},
                             {"q*u*v", p.q * u * v}});
    const cd q = p.q, Q2 = p.Q * p.Q;
    CbWeights w;
    w.x1 = omega(u * u) * (Q2 * omega(q * v * v) + omega(v * v)) *
           (omega(q * u / v) + omega(u / v) / Q2) /
           (Q2 * omega(q * u * u) * omega(q * v * v) * omega(v / u));
    w.x2 = omega(u * u) * omega(q * u / v) * (omega(q * u * v) + omega(u * v) / Q2) /
           (omega(q * u * u) * omega(u / v) * omega(q * u * v));
    w.x3 = -(Q2 * omega(q * v * v) + omega(v * v)) * (omega(q * u * v) + Q2 * omega(u * v)) /
           (Q2 * omega(q * v * v) * omega(q * u * v));
    w.x4 = omega(u * u) * (omega(q * u / v) + omega(u / v) / Q2) /
           (omega(q * u * u) * omega(v / u));
    w.x5 = omega(u * v) * (omega(q * u / v) + Q2 * omega(u / v)) /
           (omega(u / v) * omega(q * u * v));
    w.x6 = -(omega(q * u * v) + Q2 * omega(u * v)) / omega(q * u * v);
    w.y1 = omega(u * v) / omega(q * u * v);
    w.y2 = -omega(u * v) * (Q2 * omega(q * v * v) + omega(v * v)) /
           (Q2 * omega(q * v * v) * omega(q * u * v));
    w.y3 = -w.y1;
    return w;
}

// The two scalar identities tying the exchange weights to the off-shell kernel.
inline std::pair<double, double> kernel_identity_residuals(cd u, cd v, const ModelParams& p) {
    const cd Q2 = p.Q * p.Q;
    cd au = a(u, p);
    cd k = kernel(u, v, p);
    double r1 = rel_residual(au * f1(u, v, p) + Q2 * h2(u, v, p), k);
    double r2 = rel_residual(au * f2(u, v, p) + Q2 * h1(u, v, p), -Q2 / d(v, p) * k);
    return {r1, r2};
}

// ---------------------------------------------------------------------------
// Expansion weight families for the action of the diagonal blocks on a string
// of creation operators extended by one extra point w. Components are indexed
// by which block the term lands on: a, d, e (central), b2 (wide creation
// pair), b (creation at the extra point).
// ---------------------------------------------------------------------------
struct FamilyWeights {
    cd a{0.0}, d{0.0}, e{0.0}, b2{0.0}, b{0.0};
};

inline FamilyWeights gamma_weights(cd u, const std::vector<cd>& ubar, cd w,
                                   const ModelParams& p) {
    cd pf = 1.0;
    for (cd x : ubar) pf *= f(u, x, p);
    FamilyWeights out;
    out.a = f1(u, w, p) * pf;
    out.d = f2(u, w, p) * pf;
    out.e = f3(u, w, p) * pf;
    out.b2 = -pf;
    return out;
}

inline FamilyWeights theta_weights(cd u, const std::vector<cd>& ubar, cd w,
                                   const ModelParams& p) {
    const int M = static_cast<int>(ubar.size());
    const cd Qm2 = 1.0 / (p.Q * p.Q);
    FamilyWeights out;
    cd pfw = 1.0, phw = 1.0;
    for (cd x : ubar) {
        pfw *= f(w, x, p);
        phw *= h(w, x, p);
    }
    out.a = -f1(u, w, p) * pfw;
    out.d = -f2(u, w, p) * phw;
    for (int i = 0; i < M; ++i) {
        cd ui = ubar[i];
        cd pf = 1.0, ph = 1.0;
        for (int j = 0; j < M; ++j) {
            if (j == i) continue;
            pf *= f(ui, ubar[j], p);
            ph *= h(ui, ubar[j], p);
        }
        cd c1 = f1(u, ui, p), c2 = f2(u, ui, p);
        out.a += c1 * f1(ui, w, p) * pf + c2 * h2(ui, w, p) * ph;
        out.d += c1 * f2(ui, w, p) * pf + c2 * h1(ui, w, p) * ph;
        out.e += c1 * f3(ui, w, p) * pf + c2 * h3(ui, w, p) * ph;
        out.b2 -= c1 * pf - Qm2 * c2 * a(ui, p) * ph;
        out.b -= Qm2 * c2 * ph;
    }
    return out;
}

inline FamilyWeights tau_weights(cd u, const std::vector<cd>& ubar, cd w,
                                 const ModelParams& p) {
    (void)u;
    const int M = static_cast<int>(ubar.size());
    const cd qc = p.q + 1.0 / p.q;
    const cd Qm2 = 1.0 / (p.Q * p.Q);
    FamilyWeights out;
    for (int k = 2; k <= M + 1; ++k) {
        cd pf = 1.0, ph = 1.0;
        for (int j = k; j <= M; ++j) {
            pf *= f(w, ubar[j - 1], p);
            ph *= h(w, ubar[j - 1], p);
        }
        out.a += qc * Qm2 * d(w, p) * r_coeff(k - 2, p) * pf;
        out.d -= qc * r_coeff(k - 2, p) * ph;
    }
    for (int i = 2; i <= M; ++i) {
        cd ui = ubar[i - 1];
        for (int k = 2; k <= i; ++k) {
            cd pf = 1.0, ph = 1.0;
            for (int j = k; j <= M; ++j) {
                if (j == i) continue;
                pf *= f(ui, ubar[j - 1], p);
                ph *= h(ui, ubar[j - 1], p);
            }
            cd rk = r_coeff(k - 2, p);
            out.a -= qc * rk * (Qm2 * d(ui, p) * f1(ui, w, p) * pf - h2(ui, w, p) * ph);
            out.d -= qc * rk * (Qm2 * d(ui, p) * f2(ui, w, p) * pf - h1(ui, w, p) * ph);
            out.e -= qc * rk * (Qm2 * d(ui, p) * f3(ui, w, p) * pf - h3(ui, w, p) * ph);
            out.b2 += qc * rk * Qm2 * (d(ui, p) * pf + a(ui, p) * ph);
            out.b -= qc * rk * Qm2 * ph;
        }
    }
    return out;
}

inline FamilyWeights gamma_bar_weights(cd u, const std::vector<cd>& ubar, cd w,
                                       const ModelParams& p) {
    const cd Qm2 = 1.0 / (p.Q * p.Q);
    cd ph = 1.0;
    for (cd x : ubar) ph *= h(u, x, p);
    FamilyWeights out;
    out.a = h2(u, w, p) * ph;
    out.d = h1(u, w, p) * ph;
    out.e = h3(u, w, p) * ph;
    out.b2 = Qm2 * a(u, p) * ph;
    out.b = -Qm2 * ph;
    return out;
}

inline FamilyWeights theta_bar_weights(cd u, const std::vector<cd>& ubar, cd w,
                                       const ModelParams& p) {
    const int M = static_cast<int>(ubar.size());
    const cd Qm2 = 1.0 / (p.Q * p.Q);
    FamilyWeights out;
    cd pfw = 1.0, phw = 1.0;
    for (cd x : ubar) {
        pfw *= f(w, x, p);
        phw *= h(w, x, p);
    }
    out.a = -h2(u, w, p) * pfw;
    out.d = -h1(u, w, p) * phw;
    for (int i = 0; i < M; ++i) {
        cd ui = ubar[i];
        cd pf = 1.0, ph = 1.0;
        for (int j = 0; j < M; ++j) {
            if (j == i) continue;
            pf *= f(ui, ubar[j], p);
            ph *= h(ui, ubar[j], p);
        }
        cd c2 = h2(u, ui, p), c1 = h1(u, ui, p);
        out.a += c2 * f1(ui, w, p) * pf + c1 * h2(ui, w, p) * ph;
        out.d += c2 * f2(ui, w, p) * pf + c1 * h1(ui, w, p) * ph;
        out.e += c2 * f3(ui, w, p) * pf + c1 * h3(ui, w, p) * ph;
        out.b2 -= c2 * pf - Qm2 * c1 * a(ui, p) * ph;
        out.b -= Qm2 * c1 * ph;
    }
    return out;
}

// The ten functional identities the weight families must satisfy. Residuals
// are relative to the largest participating term.
inline std::vector<NamedResidual> family_identity_residuals(cd u, const std::vector<cd>& ubar,
                                                            cd w, const ModelParams& p) {
    const int M = static_cast<int>(ubar.size());
    if (M < 1) throw std::invalid_argument("family identities need at least one rapidity");
    const cd Qm2 = 1.0 / (p.Q * p.Q);
    FamilyWeights g = gamma_weights(u, ubar, w, p);
    FamilyWeights t = theta_weights(u, ubar, w, p);
    FamilyWeights ta = tau_weights(u, ubar, w, p);
    FamilyWeights gb = gamma_bar_weights(u, ubar, w, p);
    FamilyWeights tb = theta_bar_weights(u, ubar, w, p);
    cd au = a(u, p);
    std::vector<cd> ext = ubar;
    ext.push_back(w);

    auto rel = [](std::initializer_list<cd> terms, cd expect) {
        cd sum = 0.0;
        double scale = std::max(1.0, std::abs(expect));
        for (cd t_ : terms) {
            sum += t_;
            scale = std::max(scale, std::abs(t_));
        }
        return std::abs(sum - expect) / scale;
    };

    cd rM = r_coeff(M, p), sM = s_coeff(M, p);
    std::vector<NamedResidual> out;
    out.push_back({"a-expansion-a-cancels", rel({g.a, t.a, ta.a}, 0.0)});
    out.push_back({"a-expansion-d-cancels", rel({g.d, t.d, ta.d}, 0.0)});
    out.push_back({"a-expansion-e-matches-alpha",
                   rel({g.e, t.e, ta.e}, alpha_coeff(u, ext, p))});
    out.push_back({"a-expansion-b2-matches-r", rel({g.b2, t.b2, ta.b2}, rM)});
    out.push_back({"a-expansion-b-matches-s", rel({t.b, ta.b, alpha_coeff(u, ubar, p)}, sM)});
    out.push_back({"d-expansion-a-cancels", rel({gb.a, tb.a, -Qm2 * au * ta.a}, 0.0)});
    out.push_back({"d-expansion-d-cancels", rel({gb.d, tb.d, -Qm2 * au * ta.d}, 0.0)});
    out.push_back({"d-expansion-e-matches-delta",
                   rel({gb.e, tb.e, -Qm2 * au * ta.e}, delta_coeff(u, ext, p))});
    out.push_back({"d-expansion-b2-matches-r",
                   rel({gb.b2, tb.b2, -Qm2 * au * ta.b2}, -Qm2 * au * rM)});
    out.push_back({"d-expansion-b-matches-s",
                   rel({gb.b, tb.b, -Qm2 * au * ta.b, delta_coeff(u, ubar, p)},
                       -Qm2 * au * sM)});
    return out;
}

// Large-modulus limit of the wide-pair component: the finite sum must settle
// on the closed-form weight as |u| grows.
inline double large_u_b2_residual(const std::vector<cd>& ubar, cd w, const ModelParams& p,
                                  double radius) {
    cd u = std::polar(radius, 0.37);
    cd sum = gamma_weights(u, ubar, w, p).b2 + theta_weights(u, ubar, w, p).b2 +
             tau_weights(u, ubar, w, p).b2;
    cd expect = r_coeff(static_cast<int>(ubar.size()), p);
    return std::abs(sum - expect) / std::max(1.0, std::abs(expect));
}

}  // namespace coeff
}  // namespace tlbethe
