#include "oscomp/lti.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oscomp {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        throw std::invalid_argument("Polynomial: needs at least one coefficient");
    }
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) {
        coeffs_.pop_back();
    }
}

bool Polynomial::is_zero() const {
    return coeffs_.size() == 1 && coeffs_[0] == 0.0;
}

Complex Polynomial::eval(Complex s) const {
    Complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

double Polynomial::eval(double s) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

double Polynomial::coeff_scale() const {
    double m = 0.0;
    for (double c : coeffs_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

TransferFunction::TransferFunction(Polynomial n, Polynomial d) : num(std::move(n)), den(std::move(d)) {
    if (den.is_zero()) {
        throw std::invalid_argument("TransferFunction: denominator identically zero");
    }
}

TransferFunction TransferFunction::from_coeffs(std::vector<double> num, std::vector<double> den) {
    return TransferFunction(Polynomial(std::move(num)), Polynomial(std::move(den)));
}

StateSpaceModel::StateSpaceModel(std::vector<std::vector<double>> a_, std::vector<double> b_,
                                 std::vector<double> c_, std::vector<double> d_affine_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d_affine(std::move(d_affine_)) {
    const size_t n = a.size();
    if (n == 0) {
        throw std::invalid_argument("StateSpaceModel: empty A");
    }
    for (const auto& row : a) {
        if (row.size() != n) {
            throw std::invalid_argument("StateSpaceModel: A not square");
        }
    }
    if (b.size() != n || c.size() != n) {
        throw std::invalid_argument("StateSpaceModel: B/C dimension mismatch");
    }
    if (d_affine.empty()) {
        d_affine.assign(n, 0.0);
    } else if (d_affine.size() != n) {
        throw std::invalid_argument("StateSpaceModel: d_affine dimension mismatch");
    }
}

Complex tf_freq_response(const TransferFunction& tf, double omega) {
    const Complex s(0.0, omega);
    const Complex d = tf.den.eval(s);
    const double scale = std::max(tf.den.coeff_scale(), 1.0);
    if (std::abs(d) < 1e-12 * scale) {
        std::ostringstream msg;
        msg << "tf_freq_response: pole on the imaginary axis near omega=" << omega
            << " (|den|=" << std::abs(d) << ")";
        throw std::domain_error(msg.str());
    }
    return tf.num.eval(s) / d;
}

std::vector<Complex> solve_complex(std::vector<std::vector<Complex>> m, std::vector<Complex> rhs) {
    const size_t n = m.size();
    if (rhs.size() != n) {
        throw std::invalid_argument("solve_complex: dimension mismatch");
    }
    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        double best = std::abs(m[col][col]);
        for (size_t r = col + 1; r < n; ++r) {
            const double cand = std::abs(m[r][col]);
            if (cand > best) {
                best = cand;
                piv = r;
            }
        }
        if (piv != col) {
            std::swap(m[piv], m[col]);
            std::swap(rhs[piv], rhs[col]);
        }
        max_pivot = std::max(max_pivot, best);
        min_pivot = std::min(min_pivot, best);
        if (best == 0.0 || (max_pivot > 0.0 && best < 1e-14 * max_pivot)) {
            std::ostringstream msg;
            msg << "solve_complex: singular matrix (pivot ratio ~ "
                << (max_pivot > 0.0 ? best / max_pivot : 0.0) << ")";
            throw std::domain_error(msg.str());
        }
        const Complex inv_piv = 1.0 / m[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            const Complex f = m[r][col] * inv_piv;
            if (f == Complex(0.0, 0.0)) continue;
            for (size_t k = col; k < n; ++k) {
                m[r][k] -= f * m[col][k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<Complex> x(n);
    for (size_t i = n; i-- > 0;) {
        Complex acc = rhs[i];
        for (size_t k = i + 1; k < n; ++k) {
            acc -= m[i][k] * x[k];
        }
        x[i] = acc / m[i][i];
    }
    return x;
}

Complex ss_freq_response(const StateSpaceModel& ss, double omega) {
    const size_t n = ss.a.size();
    std::vector<std::vector<Complex>> m(n, std::vector<Complex>(n));
    for (size_t i = 0; i < n; ++i) {
        for (size_t k = 0; k < n; ++k) {
            m[i][k] = -ss.a[i][k];
        }
        m[i][i] += Complex(0.0, omega);
    }
    std::vector<Complex> rhs(ss.b.begin(), ss.b.end());
    std::vector<Complex> x;
    try {
        x = solve_complex(std::move(m), std::move(rhs));
    } catch (const std::domain_error& e) {
        std::ostringstream msg;
        msg << "ss_freq_response: singular resolvent at omega=" << omega << "; " << e.what();
        throw std::domain_error(msg.str());
    }
    Complex y = 0.0;
    for (size_t i = 0; i < n; ++i) {
        y += ss.c[i] * x[i];
    }
    return y;
}

Complex implied_forward_gain(const FreqResponse& plant_v_to_y, double omega) {
    if (omega == 0.0) {
        throw std::domain_error("implied_forward_gain: undefined at omega=0");
    }
    const Complex jw(0.0, omega);
    return jw * jw * plant_v_to_y(omega);
}

double phase_principal(Complex c) {
    if (c == Complex(0.0, 0.0)) {
        throw std::domain_error("phase_principal: zero input");
    }
    if (c.imag() == 0.0) {
        return c.real() < 0.0 ? M_PI : 0.0;  // maps -0.0 imag onto the +pi branch
    }
    double a = std::arg(c);
    if (a <= -M_PI) {
        a = M_PI;
    }
    return a;
}

FreqResponse series(FreqResponse a, FreqResponse b) {
    return [a = std::move(a), b = std::move(b)](double omega) { return a(omega) * b(omega); };
}

FreqResponse as_response(const TransferFunction& tf) {
    return [tf](double omega) { return tf_freq_response(tf, omega); };
}

FreqResponse as_response(const StateSpaceModel& ss) {
    return [ss](double omega) { return ss_freq_response(ss, omega); };
}

StateSpaceModel from_first_order_tf(const TransferFunction& tf) {
    const auto& nc = tf.num.coeffs();
    const auto& dc = tf.den.coeffs();
    if (dc.size() != 2 || nc.size() != 1) {
        throw std::invalid_argument("from_first_order_tf: expects k/(d0 + d1 s)");
    }
    const double d1 = dc[1];
    if (d1 == 0.0) {
        throw std::invalid_argument("from_first_order_tf: degenerate denominator");
    }
    // x' = -(d0/d1) x + (k/d1) u,  y = x
    return StateSpaceModel({{-dc[0] / d1}}, {nc[0] / d1}, {1.0});
}

StateSpaceModel ss_series(const StateSpaceModel& upstream, const StateSpaceModel& downstream) {
    const int nu = upstream.order();
    const int nd = downstream.order();
    const int n = nu + nd;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (int i = 0; i < nu; ++i) {
        for (int k = 0; k < nu; ++k) {
            a[i][k] = upstream.a[i][k];
        }
        b[i] = upstream.b[i];
        d[i] = upstream.d_affine[i];
    }
    for (int i = 0; i < nd; ++i) {
        for (int k = 0; k < nd; ++k) {
            a[nu + i][nu + k] = downstream.a[i][k];
        }
        for (int k = 0; k < nu; ++k) {
            a[nu + i][k] = downstream.b[i] * upstream.c[k];
        }
        c[nu + i] = downstream.c[i];
        d[nu + i] = downstream.d_affine[i];
    }
    return StateSpaceModel(std::move(a), std::move(b), std::move(c), std::move(d));
}

}  // namespace oscomp
