#include "shellflow/spectral.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shellflow {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

SpectralField::SpectralField(int max_mode, bool zero_mean)
    : K_(max_mode), zero_mean_(zero_mean), a_(static_cast<size_t>(max_mode) + 1, 0.0),
      b_(static_cast<size_t>(max_mode) + 1, 0.0) {
    assert(max_mode >= 0);
}

void SpectralField::set_mean(double v) {
    if (zero_mean_ && v != 0.0)
        throw std::logic_error("SpectralField: attempt to set nonzero mean on zero-mean field");
    a_[0] = v;
}

double SpectralField::eval(double y) const {
    double s = a_[0];
    for (int k = 1; k <= K_; ++k) {
        const double t = two_pi * k * y;
        s += a_[static_cast<size_t>(k)] * std::cos(t) + b_[static_cast<size_t>(k)] * std::sin(t);
    }
    return s;
}

double SpectralField::eval_deriv(double y) const {
    double s = 0.0;
    for (int k = 1; k <= K_; ++k) {
        const double t = two_pi * k * y;
        const double w = two_pi * k;
        s += -w * a_[static_cast<size_t>(k)] * std::sin(t) + w * b_[static_cast<size_t>(k)] * std::cos(t);
    }
    return s;
}

double SpectralField::eval_deriv2(double y) const {
    double s = 0.0;
    for (int k = 1; k <= K_; ++k) {
        const double t = two_pi * k * y;
        const double w2 = two_pi * k * (two_pi * k);
        s += -w2 * (a_[static_cast<size_t>(k)] * std::cos(t) + b_[static_cast<size_t>(k)] * std::sin(t));
    }
    return s;
}

SpectralField SpectralField::derivative() const {
    SpectralField d(K_, true);
    for (int k = 1; k <= K_; ++k) {
        const double w = two_pi * k;
        d.a_[static_cast<size_t>(k)] = w * b_[static_cast<size_t>(k)];
        d.b_[static_cast<size_t>(k)] = -w * a_[static_cast<size_t>(k)];
    }
    return d;
}

SpectralField SpectralField::laplacian() const {
    SpectralField d(K_, true);
    for (int k = 1; k <= K_; ++k) {
        const double w2 = two_pi * k * (two_pi * k);
        d.a_[static_cast<size_t>(k)] = -w2 * a_[static_cast<size_t>(k)];
        d.b_[static_cast<size_t>(k)] = -w2 * b_[static_cast<size_t>(k)];
    }
    return d;
}

SpectralField SpectralField::fractional_multiplier(double s) const {
    SpectralField out(K_, zero_mean_);
    if (s == 0.0) {
        out.a_ = a_;
        out.b_ = b_;
        return out;
    }
    out.a_[0] = 0.0; // (2 pi * 0)^{2s} = 0 for s > 0
    for (int k = 1; k <= K_; ++k) {
        const double f = std::pow(two_pi * k, 2.0 * s);
        out.a_[static_cast<size_t>(k)] = f * a_[static_cast<size_t>(k)];
        out.b_[static_cast<size_t>(k)] = f * b_[static_cast<size_t>(k)];
    }
    return out;
}

double SpectralField::multiplier_norm(double exponent) const {
    double sum = 0.0;
    if (exponent == 0.0) sum += a_[0] * a_[0];
    for (int k = 1; k <= K_; ++k) {
        const double f = std::pow(two_pi * k, 2.0 * exponent);
        const double mode2 =
            0.5 * (a_[static_cast<size_t>(k)] * a_[static_cast<size_t>(k)] +
                   b_[static_cast<size_t>(k)] * b_[static_cast<size_t>(k)]);
        sum += f * mode2;
    }
    return std::sqrt(sum);
}

std::vector<double> SpectralField::to_samples(int m) const {
    std::vector<double> out(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) out[static_cast<size_t>(j)] = eval(static_cast<double>(j) / m);
    return out;
}

SpectralField SpectralField::from_samples(const std::vector<double>& samples, int max_mode,
                                          bool zero_mean) {
    const int m = static_cast<int>(samples.size());
    if (m < 2 * max_mode + 1)
        throw std::invalid_argument("SpectralField::from_samples: too few samples for requested modes");
    SpectralField u(max_mode, zero_mean);
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= m;
    if (!zero_mean) u.a_[0] = mean;
    for (int k = 1; k <= max_mode; ++k) {
        double ca = 0.0, cb = 0.0;
        for (int j = 0; j < m; ++j) {
            const double t = two_pi * k * j / m;
            ca += samples[static_cast<size_t>(j)] * std::cos(t);
            cb += samples[static_cast<size_t>(j)] * std::sin(t);
        }
        u.a_[static_cast<size_t>(k)] = 2.0 * ca / m;
        u.b_[static_cast<size_t>(k)] = 2.0 * cb / m;
    }
    return u;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    if (o.K_ > K_) {
        a_.resize(static_cast<size_t>(o.K_) + 1, 0.0);
        b_.resize(static_cast<size_t>(o.K_) + 1, 0.0);
        K_ = o.K_;
    }
    for (int k = 0; k <= o.K_; ++k) {
        a_[static_cast<size_t>(k)] += o.a_[static_cast<size_t>(k)];
        b_[static_cast<size_t>(k)] += o.b_[static_cast<size_t>(k)];
    }
    if (zero_mean_) a_[0] = 0.0;
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    SpectralField neg = o;
    neg *= -1.0;
    return (*this += neg);
}

SpectralField& SpectralField::operator*=(double c) {
    for (auto& v : a_) v *= c;
    for (auto& v : b_) v *= c;
    return *this;
}

double SpectralField::sup_abs(int samples) const {
    double m = 0.0;
    for (int j = 0; j < samples; ++j)
        m = std::max(m, std::abs(eval(static_cast<double>(j) / samples)));
    return m;
}

double sobolev_norm(const SpectralField& u, double s) { return u.multiplier_norm(s); }

double l2_inner(const SpectralField& u, const SpectralField& v) {
    double sum = u.mean() * v.mean();
    const int K = std::min(u.max_mode(), v.max_mode());
    for (int k = 1; k <= K; ++k)
        sum += 0.5 * (u.cos_coeff(k) * v.cos_coeff(k) + u.sin_coeff(k) * v.sin_coeff(k));
    return sum;
}

double w22_inner(const SpectralField& u, const SpectralField& v) {
    double sum = u.mean() * v.mean();
    const int K = std::min(u.max_mode(), v.max_mode());
    for (int k = 1; k <= K; ++k) {
        const double w = 1.0 + (two_pi * k) * (two_pi * k);
        sum += w * w * 0.5 * (u.cos_coeff(k) * v.cos_coeff(k) + u.sin_coeff(k) * v.sin_coeff(k));
    }
    return sum;
}

SpectralField multiply(const SpectralField& u, const SpectralField& v, int max_mode) {
    const int m = std::max(4 * (u.max_mode() + v.max_mode() + 1), 2 * max_mode + 2);
    const auto su = u.to_samples(m);
    const auto sv = v.to_samples(m);
    std::vector<double> prod(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) prod[static_cast<size_t>(j)] = su[static_cast<size_t>(j)] * sv[static_cast<size_t>(j)];
    return SpectralField::from_samples(prod, max_mode);
}

double trapezoid_mean(const std::vector<double>& samples) {
    double s = 0.0;
    for (double v : samples) s += v;
    return s / static_cast<double>(samples.size());
}

} // namespace shellflow
