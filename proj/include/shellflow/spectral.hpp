#pragma once

#include <cstddef>
#include <vector>

namespace shellflow {

/// Real periodic function on the unit torus omega = [0,1), stored as a
/// truncated Fourier series
///
///   u(y) = a0 + sum_{k=1..K} ( a_k cos(2 pi k y) + b_k sin(2 pi k y) ).
///
/// The real coefficient storage keeps conjugate symmetry automatic. Fields
/// flagged zero_mean keep a0 pinned to exactly 0.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(int max_mode, bool zero_mean = false);

    int max_mode() const { return K_; }
    bool zero_mean() const { return zero_mean_; }

    double mean() const { return a_[0]; }
    void set_mean(double v);

    // cos/sin coefficient accessors, k in 1..K
    double cos_coeff(int k) const { return a_[static_cast<size_t>(k)]; }
    double sin_coeff(int k) const { return b_[static_cast<size_t>(k)]; }
    void set_cos(int k, double v) { a_[static_cast<size_t>(k)] = v; }
    void set_sin(int k, double v) { b_[static_cast<size_t>(k)] = v; }

    double eval(double y) const;
    double eval_deriv(double y) const;
    double eval_deriv2(double y) const;

    /// d/dy as a new field.
    SpectralField derivative() const;
    /// d^2/dy^2 as a new field.
    SpectralField laplacian() const;

    /// Multiply mode k by (2 pi |k|)^{2s}; realizes the fractional Laplacian
    /// Delta_y^s as a Fourier multiplier. s = 0 is the identity; for s > 0
    /// the mean is annihilated (0^{2s} = 0).
    SpectralField fractional_multiplier(double s) const;

    /// ( sum_k (2 pi |k|)^{2s} |u_k|^2 )^{1/2}, the W^{s',2}(omega)-equivalent
    /// norm with s' = 2s ... callers pass the Sobolev order directly, see
    /// sobolev_norm() below which takes the order s and uses exponent s.
    double multiplier_norm(double exponent) const;

    /// Uniform samples u(j/m), j = 0..m-1.
    std::vector<double> to_samples(int m) const;

    /// Trigonometric least-squares / DFT fit from m uniform samples onto
    /// modes 0..K (requires m >= 2K+1 for exactness on band-limited data).
    static SpectralField from_samples(const std::vector<double>& samples, int max_mode,
                                      bool zero_mean = false);

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double c);
    friend SpectralField operator+(SpectralField u, const SpectralField& v) { return u += v; }
    friend SpectralField operator-(SpectralField u, const SpectralField& v) { return u -= v; }
    friend SpectralField operator*(double c, SpectralField u) { return u *= c; }

    double sup_abs(int samples = 2048) const;

  private:
    int K_ = 0;
    bool zero_mean_ = false;
    std::vector<double> a_{0.0}; // a_[0] = mean, a_[k] cos coefficients
    std::vector<double> b_{0.0}; // b_[0] unused
};

/// W^{s,2}(omega)-equivalent norm of a real periodic field:
/// ( sum_k (2 pi |k|)^{2s} |hat u_k|^2 )^{1/2} over complex modes.
/// For s > 0 this ignores the mean (the fields of interest are zero-mean).
double sobolev_norm(const SpectralField& u, double s);

/// L^2(omega) inner product via Parseval.
double l2_inner(const SpectralField& u, const SpectralField& v);

/// Inner product sum_k (1+(2 pi k)^2)^2 hat u_k bar hat v_k, the spectral
/// realization of the W^{2,2}(omega) pairing used by the shell projections.
double w22_inner(const SpectralField& u, const SpectralField& v);

/// Pointwise product restricted back to max_mode modes (grid multiply + fit).
SpectralField multiply(const SpectralField& u, const SpectralField& v, int max_mode);

/// Trapezoid quadrature of a grid-sampled integrand over omega.
double trapezoid_mean(const std::vector<double>& samples);

} // namespace shellflow
