#pragma once

#include <complex>

namespace tlbethe {

// Forward-mode dual number over complex doubles: carries a value and the
// derivative with respect to one chosen variable. Pushing a Jet through the
// scalar formulas yields exact analytic derivatives (for Newton Jacobians and
// the determinant formula) without hand-written derivative expressions.
struct Jet {
    std::complex<double> a;  // value
    std::complex<double> b;  // derivative

    Jet() : a(0), b(0) {}
    Jet(std::complex<double> v) : a(v), b(0) {}
    Jet(double v) : a(v), b(0) {}
    Jet(std::complex<double> v, std::complex<double> d) : a(v), b(d) {}

    static Jet variable(std::complex<double> v) { return Jet(v, 1.0); }

    Jet operator-() const { return Jet(-a, -b); }

    friend Jet operator+(const Jet& x, const Jet& y) { return Jet(x.a + y.a, x.b + y.b); }
    friend Jet operator-(const Jet& x, const Jet& y) { return Jet(x.a - y.a, x.b - y.b); }
    friend Jet operator*(const Jet& x, const Jet& y) {
        return Jet(x.a * y.a, x.a * y.b + x.b * y.a);
    }
    friend Jet operator/(const Jet& x, const Jet& y) {
        return Jet(x.a / y.a, (x.b * y.a - x.a * y.b) / (y.a * y.a));
    }

    Jet& operator+=(const Jet& y) { *this = *this + y; return *this; }
    Jet& operator-=(const Jet& y) { *this = *this - y; return *this; }
    Jet& operator*=(const Jet& y) { *this = *this * y; return *this; }
    Jet& operator/=(const Jet& y) { *this = *this / y; return *this; }
};

inline Jet pow_int(Jet x, int n) {
    Jet out(1.0);
    bool inv = n < 0;
    if (inv) n = -n;
    while (n-- > 0) out *= x;
    return inv ? Jet(1.0) / out : out;
}

}  // namespace tlbethe
