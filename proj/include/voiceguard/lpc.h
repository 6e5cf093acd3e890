// Copyright 2026 The VoiceGuard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Linear prediction and polynomial root finding. Both are templated on the
// scalar type of the Eigen expression they are given.
//
// Predictor convention: A(z) = 1 + a_1 z^-1 + ... + a_p z^-p, so the
// prediction of x[n] is -sum_i a_i x[n - i]. Its poles are the roots of the
// monic polynomial z^p + a_1 z^(p-1) + ... + a_p.

#ifndef VOICEGUARD_LPC_H_
#define VOICEGUARD_LPC_H_

#include <cmath>
#include <complex>
#include <cstdlib>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "voiceguard/errors.h"

namespace voiceguard {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LpcResult {
  Vector<Scalar> coeffs;  // a_1 .. a_p
  Scalar error_power = 0;  // final forward/backward prediction-error power
  bool zero_energy = false;
};

// Burg recursion. Every reflection coefficient has magnitude <= 1, so the
// predictor is minimum phase. Order 0 returns no coefficients and the frame
// power as error. A zero-energy frame returns all-zero coefficients with
// zero_energy set.
template <typename Derived>
LpcResult<typename Derived::Scalar> lpc_burg(
    const Eigen::MatrixBase<Derived>& frame, int order) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = frame.size();
  if (order < 0) throw InvalidArgument("LPC order must be non-negative");
  if (n <= order) throw InvalidArgument("frame must be longer than LPC order");

  LpcResult<Scalar> result;
  result.coeffs = Vector<Scalar>::Zero(order);
  result.error_power = frame.squaredNorm() / static_cast<Scalar>(n);
  if (order == 0) return result;
  if (result.error_power == Scalar(0)) {
    result.zero_energy = true;
    return result;
  }

  Vector<Scalar> fwd = frame;
  Vector<Scalar> bwd = frame;
  Vector<Scalar>& a = result.coeffs;
  for (int k = 0; k < order; ++k) {
    const Eigen::Index len = n - k - 1;
    const auto f = fwd.segment(k + 1, len);
    const auto b = bwd.segment(k, len);
    const Scalar den = f.squaredNorm() + b.squaredNorm();
    const Scalar refl = den > Scalar(0) ? Scalar(-2) * f.dot(b) / den
                                        : Scalar(0);

    const Vector<Scalar> prev = a.head(k);
    for (int i = 0; i < k; ++i) a[i] = prev[i] + refl * prev[k - 1 - i];
    a[k] = refl;

    for (Eigen::Index j = n - 1; j > k; --j) {
      const Scalar fj = fwd[j];
      const Scalar bj = bwd[j - 1];
      fwd[j] = fj + refl * bj;
      bwd[j] = bj + refl * fj;
    }
    result.error_power *= (Scalar(1) - refl * refl);
  }
  return result;
}

namespace detail {

// Parlett-Reinsch balancing by powers of two; leaves eigenvalues unchanged.
template <typename Scalar>
void balance(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
  const Eigen::Index n = m.rows();
  bool changed = true;
  while (changed) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar row = 0, col = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        row += std::abs(m(i, j));
        col += std::abs(m(j, i));
      }
      if (row == Scalar(0) || col == Scalar(0)) continue;
      int exponent = 0;
      std::frexp(row / col, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const Scalar new_col = std::ldexp(col, exponent);
      const Scalar new_row = std::ldexp(row, -exponent);
      if (new_col + new_row < Scalar(0.95) * (col + row)) {
        m.row(i) *= std::ldexp(Scalar(1), -exponent);
        m.col(i) *= std::ldexp(Scalar(1), exponent);
        changed = true;
      }
    }
  }
}

template <typename Derived>
std::complex<typename Derived::Scalar> horner(
    const Eigen::MatrixBase<Derived>& c,
    std::complex<typename Derived::Scalar> z,
    std::complex<typename Derived::Scalar>* derivative = nullptr) {
  using C = std::complex<typename Derived::Scalar>;
  C p = c[0];
  C dp = 0;
  for (Eigen::Index i = 1; i < c.size(); ++i) {
    dp = dp * z + p;
    p = p * z + c[i];
  }
  if (derivative != nullptr) *derivative = dp;
  return p;
}

}  // namespace detail

// Evaluates c[0] z^d + c[1] z^(d-1) + ... + c[d].
template <typename Derived>
std::complex<typename Derived::Scalar> poly_eval(
    const Eigen::MatrixBase<Derived>& coeffs,
    std::complex<typename Derived::Scalar> z) {
  return detail::horner(coeffs, z);
}

constexpr int kMaxRootDegree = 32;

// Roots of c[0] z^d + ... + c[d] as eigenvalues of the balanced companion
// matrix, each polished by a few Newton steps. Degree 0 yields no roots.
template <typename Derived>
Vector<std::complex<typename Derived::Scalar>> poly_roots(
    const Eigen::MatrixBase<Derived>& coeffs) {
  using Scalar = typename Derived::Scalar;
  using Complex = std::complex<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index degree = coeffs.size() - 1;
  if (degree <= 0) return {};
  if (coeffs[0] == Scalar(0)) {
    throw InvalidArgument("leading polynomial coefficient is zero");
  }
  if (degree > kMaxRootDegree) {
    throw InvalidArgument("polynomial degree exceeds 32");
  }

  Matrix companion = Matrix::Zero(degree, degree);
  companion.row(0) = -coeffs.tail(degree).transpose() / coeffs[0];
  if (degree > 1) companion.diagonal(-1).setOnes();
  detail::balance(companion);

  Eigen::EigenSolver<Matrix> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error("companion matrix eigenvalue iteration did not converge");
  }
  Vector<Complex> roots = solver.eigenvalues();

  for (Eigen::Index r = 0; r < roots.size(); ++r) {
    Complex z = roots[r];
    Complex dp;
    Complex p = detail::horner(coeffs, z, &dp);
    for (int iter = 0; iter < 3 && std::abs(p) > Scalar(0); ++iter) {
      if (dp == Complex(0)) break;
      Complex next = z - p / dp;
      // Keep conjugate pairs and real roots structurally intact.
      if (roots[r].imag() == Scalar(0)) next = Complex(next.real(), 0);
      Complex dnext;
      const Complex pnext = detail::horner(coeffs, next, &dnext);
      if (!(std::abs(pnext) < std::abs(p))) break;
      z = next;
      p = pnext;
      dp = dnext;
    }
    roots[r] = z;
  }
  return roots;
}

}  // namespace voiceguard

#endif  // VOICEGUARD_LPC_H_
