#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "svx/types.hpp"

namespace svx {

/**
 * \brief Dense multivariate polynomial with a uniform per-variable degree cap.
 *
 * Coefficients are stored as a dense tensor of extent (cap+1) per variable,
 * flattened with variable 0 fastest: flat = sum_k e_k * (cap+1)^k.
 * Arithmetic never re-caps silently; products return cap_a + cap_b and
 * callers truncate explicitly.
 */
template <typename Scalar = Cplx>
class SymPoly {
 public:
  SymPoly() : nvars_(1), cap_(0), coef_(VectorX<Scalar>::Zero(1)) {}

  SymPoly(int nvars, int cap)
      : nvars_(nvars), cap_(cap) {
    if (nvars < 1) throw config_error("SymPoly: nvars must be >= 1");
    if (cap < 0) throw config_error("SymPoly: cap must be >= 0");
    coef_ = VectorX<Scalar>::Zero(tensor_size(nvars, cap));
  }

  static SymPoly constant(int nvars, int cap, Scalar value) {
    SymPoly p(nvars, cap);
    p.coef_[0] = value;
    return p;
  }

  static SymPoly monomial(int nvars, int cap, const std::vector<int>& exps,
                          Scalar value) {
    SymPoly p(nvars, cap);
    p.at(exps) = value;
    return p;
  }

  int nvars() const { return nvars_; }
  int cap() const { return cap_; }
  Eigen::Index size() const { return coef_.size(); }
  const VectorX<Scalar>& coeffs() const { return coef_; }
  VectorX<Scalar>& coeffs() { return coef_; }

  Scalar& at(const std::vector<int>& exps) { return coef_[flat_index(exps)]; }
  const Scalar& at(const std::vector<int>& exps) const {
    return coef_[flat_index(exps)];
  }

  Eigen::Index flat_index(const std::vector<int>& exps) const {
    if (static_cast<int>(exps.size()) != nvars_)
      throw config_error("SymPoly: exponent list has wrong arity");
    Eigen::Index idx = 0, stride = 1;
    for (int k = 0; k < nvars_; ++k) {
      if (exps[k] < 0 || exps[k] > cap_)
        throw config_error("SymPoly: exponent outside cap");
      idx += exps[k] * stride;
      stride *= (cap_ + 1);
    }
    return idx;
  }

  std::vector<int> exponents_of(Eigen::Index flat) const {
    std::vector<int> e(nvars_);
    for (int k = 0; k < nvars_; ++k) {
      e[k] = static_cast<int>(flat % (cap_ + 1));
      flat /= (cap_ + 1);
    }
    return e;
  }

  /// Horner evaluation, one tensor contraction per variable.
  Scalar eval(const std::vector<Scalar>& point) const {
    if (static_cast<int>(point.size()) != nvars_)
      throw config_error("SymPoly::eval: point has wrong arity");
    std::vector<Scalar> work(coef_.data(), coef_.data() + coef_.size());
    Eigen::Index block = coef_.size() / (cap_ + 1);
    for (int v = nvars_ - 1; v >= 0; --v) {
      const Scalar x = point[v];
      for (Eigen::Index j = 0; j < block; ++j) {
        Scalar acc = work[j + static_cast<Eigen::Index>(cap_) * block];
        for (int e = cap_ - 1; e >= 0; --e) acc = acc * x + work[j + e * block];
        work[j] = acc;
      }
      block /= (cap_ + 1);
    }
    return work[0];
  }

  /// order-th partial derivative in variable var; cap is kept.
  SymPoly partial(int var, int order) const {
    check_var(var);
    if (order < 0) throw config_error("SymPoly::partial: negative order");
    SymPoly out(nvars_, cap_);
    if (order > cap_) return out;
    const Eigen::Index stride = stride_of(var);
    const Eigen::Index outer = coef_.size() / ((cap_ + 1) * stride);
    for (Eigen::Index o = 0; o < outer; ++o)
      for (Eigen::Index i = 0; i < stride; ++i) {
        const Eigen::Index base = o * (cap_ + 1) * stride + i;
        for (int e = 0; e + order <= cap_; ++e) {
          double fac = 1.0;
          for (int j = 1; j <= order; ++j) fac *= static_cast<double>(e + j);
          out.coef_[base + e * stride] =
              coef_[base + (e + order) * stride] * Scalar(fac);
        }
      }
    return out;
  }

  /// Substitute a numeric value for variable var; the result has degree 0
  /// in var (arity and cap are kept so bases stay aligned).
  SymPoly substitute(int var, Scalar value) const {
    check_var(var);
    SymPoly out(nvars_, cap_);
    const Eigen::Index stride = stride_of(var);
    const Eigen::Index outer = coef_.size() / ((cap_ + 1) * stride);
    for (Eigen::Index o = 0; o < outer; ++o)
      for (Eigen::Index i = 0; i < stride; ++i) {
        const Eigen::Index base = o * (cap_ + 1) * stride + i;
        Scalar acc = coef_[base + static_cast<Eigen::Index>(cap_) * stride];
        for (int e = cap_ - 1; e >= 0; --e)
          acc = acc * value + coef_[base + e * stride];
        out.coef_[base] = acc;
      }
    return out;
  }

  /// Keep exponents <= new_cap, drop the rest (explicit re-capping).
  SymPoly truncated(int new_cap) const {
    SymPoly out(nvars_, new_cap);
    const int m = std::min(cap_, new_cap);
    std::vector<int> e(nvars_, 0);
    for (;;) {
      out.at(e) = at(e);
      int k = 0;
      while (k < nvars_ && ++e[k] > m) e[k++] = 0;
      if (k == nvars_) break;
    }
    return out;
  }

  /// Max |coefficient| with any exponent exceeding bound (degree diagnostics).
  double tail_norm(int bound) const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < coef_.size(); ++i) {
      const auto e = exponents_of(i);
      if (*std::max_element(e.begin(), e.end()) > bound)
        worst = std::max(worst, std::abs(coef_[i]));
    }
    return worst;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < coef_.size(); ++i)
      m = std::max(m, std::abs(coef_[i]));
    return m;
  }

  /// Largest exponent of var whose coefficient exceeds tol in modulus.
  int degree(int var, double tol = 0.0) const {
    check_var(var);
    int deg = 0;
    for (Eigen::Index i = 0; i < coef_.size(); ++i)
      if (std::abs(coef_[i]) > tol) deg = std::max(deg, exponents_of(i)[var]);
    return deg;
  }

  SymPoly operator+(const SymPoly& rhs) const { return combined(rhs, Scalar(1)); }
  SymPoly operator-(const SymPoly& rhs) const { return combined(rhs, Scalar(-1)); }

  SymPoly operator*(Scalar s) const {
    SymPoly out = *this;
    out.coef_ *= s;
    return out;
  }

  /// Exact product; result cap = cap_a + cap_b (no silent truncation).
  SymPoly operator*(const SymPoly& rhs) const {
    if (rhs.nvars_ != nvars_)
      throw config_error("SymPoly: arity mismatch in product");
    SymPoly out(nvars_, cap_ + rhs.cap_);
    for (Eigen::Index i = 0; i < coef_.size(); ++i) {
      if (coef_[i] == Scalar(0)) continue;
      const auto ei = exponents_of(i);
      for (Eigen::Index j = 0; j < rhs.coef_.size(); ++j) {
        if (rhs.coef_[j] == Scalar(0)) continue;
        auto e = rhs.exponents_of(j);
        for (int k = 0; k < nvars_; ++k) e[k] += ei[k];
        out.at(e) += coef_[i] * rhs.coef_[j];
      }
    }
    return out;
  }

  static Eigen::Index tensor_size(int nvars, int cap) {
    Eigen::Index s = 1;
    for (int k = 0; k < nvars; ++k) s *= (cap + 1);
    return s;
  }

 private:
  void check_var(int var) const {
    if (var < 0 || var >= nvars_)
      throw config_error("SymPoly: variable index out of range");
  }

  Eigen::Index stride_of(int var) const {
    Eigen::Index s = 1;
    for (int k = 0; k < var; ++k) s *= (cap_ + 1);
    return s;
  }

  SymPoly combined(const SymPoly& rhs, Scalar sign) const {
    if (rhs.nvars_ != nvars_)
      throw config_error("SymPoly: arity mismatch in sum");
    const int m = std::max(cap_, rhs.cap_);
    SymPoly out(nvars_, m);
    for (Eigen::Index i = 0; i < coef_.size(); ++i)
      out.at(exponents_of(i)) += coef_[i];
    for (Eigen::Index j = 0; j < rhs.coef_.size(); ++j)
      out.at(rhs.exponents_of(j)) += sign * rhs.coef_[j];
    return out;
  }

  int nvars_;
  int cap_;
  VectorX<Scalar> coef_;
};

using CSymPoly = SymPoly<Cplx>;

}  // namespace svx
