#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace oscomp {

using Complex = std::complex<double>;

/// Frequency response of a SISO path: omega [rad/s] -> complex gain.
using FreqResponse = std::function<Complex(double)>;

/// Real polynomial in s, coefficients ascending by power.
class Polynomial {
  public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> coeffs);

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const;

    Complex eval(Complex s) const;
    double eval(double s) const;

    /// Largest |coefficient|, used as the scale for near-pole checks.
    double coeff_scale() const;

  private:
    std::vector<double> coeffs_;  // trailing coefficient nonzero after trim
};

/// Rational transfer function num(s)/den(s).
struct TransferFunction {
    Polynomial num;
    Polynomial den;

    TransferFunction(Polynomial n, Polynomial d);
    static TransferFunction from_coeffs(std::vector<double> num, std::vector<double> den);
};

/// Continuous LTI plant  x' = A x + B u + d_affine,  y = C x.
/// d_affine is a constant additive state derivative (gravity in the case
/// study), not a feedthrough; frequency responses ignore it.
struct StateSpaceModel {
    std::vector<std::vector<double>> a;  // n x n
    std::vector<double> b;               // n (single input)
    std::vector<double> c;               // n (single output)
    std::vector<double> d_affine;        // n, may be empty (= zeros)

    StateSpaceModel() : StateSpaceModel({{0.0}}, {0.0}, {0.0}) {}
    StateSpaceModel(std::vector<std::vector<double>> a_, std::vector<double> b_,
                    std::vector<double> c_, std::vector<double> d_affine_ = {});

    int order() const { return static_cast<int>(a.size()); }
};

/// num(j w)/den(j w). Throws std::domain_error when |den(j w)| falls below
/// 1e-12 x coefficient scale (pole on the imaginary axis).
Complex tf_freq_response(const TransferFunction& tf, double omega);

/// C (j w I - A)^{-1} B via complex Gaussian elimination with partial
/// pivoting. Throws std::domain_error with a condition estimate when the
/// resolvent is singular (e.g. w = 0 with an integrator mode).
Complex ss_freq_response(const StateSpaceModel& ss, double omega);

/// G(j w) = (j w)^2 H(j w) where H is the full control-to-output response.
/// The double-integrator factorization is undefined at DC; throws on w = 0.
Complex implied_forward_gain(const FreqResponse& plant_v_to_y, double omega);

/// Principal-value argument in (-pi, pi]; -1 maps to +pi. Throws on 0.
double phase_principal(Complex c);

/// Pointwise product of two frequency responses.
FreqResponse series(FreqResponse a, FreqResponse b);

FreqResponse as_response(const TransferFunction& tf);
FreqResponse as_response(const StateSpaceModel& ss);

/// State-space realization of a first-order transfer function
/// (k0 + k1 s)/(d0 + d1 s) with d1 != 0 and k1 = 0 (strictly proper).
StateSpaceModel from_first_order_tf(const TransferFunction& tf);

/// Series composition: `upstream` output feeds `downstream` input. The
/// combined d_affine keeps each block's own constant term.
StateSpaceModel ss_series(const StateSpaceModel& upstream, const StateSpaceModel& downstream);

/// Solve M z = rhs for complex square M, Gaussian elimination with partial
/// pivoting. Throws std::domain_error with a pivot-ratio estimate on a
/// singular system.
std::vector<Complex> solve_complex(std::vector<std::vector<Complex>> m, std::vector<Complex> rhs);

}  // namespace oscomp
