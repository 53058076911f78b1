/*
 * Copyright 2026 The quatkgc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Block-quaternion arithmetic over structure-of-arrays storage.
//
// A block of m quaternions q_i = a_i + b_i i + c_i j + d_i k is held as four
// parallel arrays. Embedding rows of width 4m are viewed as blocks with
// a = row[0, m), b = row[m, 2m), c = row[2m, 3m), d = row[3m, 4m).
//
// Backward functions accumulate into their gradient outputs (+=) so that a
// caller can chain several contributions into one buffer.
//
// The complex section at the bottom mirrors the quaternion API for the
// Hadamard (complex-plane) scoring variants: rows of width 2m are viewed as
// re = row[0, m), im = row[m, 2m).

#ifndef QUATKGC_QUAT_ALGEBRA_H_
#define QUATKGC_QUAT_ALGEBRA_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "quatkgc/errors.h"

namespace quatkgc {

// Guard added under the square root when normalizing.
inline constexpr double kNormalizeEps = 1e-12;

template <typename T>
struct QuatSpan {
  std::span<T> a, b, c, d;

  std::size_t size() const { return a.size(); }

  operator QuatSpan<const T>() const
    requires(!std::is_const_v<T>)
  {
    return {a, b, c, d};
  }
};

template <typename T>
QuatSpan<T> as_quats(std::span<T> row) {
  if (row.size() % 4 != 0) {
    throw ContractViolation("quaternion row width " +
                            std::to_string(row.size()) +
                            " is not divisible by 4");
  }
  const std::size_t m = row.size() / 4;
  return {row.subspan(0, m), row.subspan(m, m), row.subspan(2 * m, m),
          row.subspan(3 * m, m)};
}

// Owning block of m quaternions.
template <typename T>
class QuatBlock {
 public:
  QuatBlock() = default;
  explicit QuatBlock(std::size_t m) : a_(m), b_(m), c_(m), d_(m) {}
  QuatBlock(std::vector<T> a, std::vector<T> b, std::vector<T> c,
            std::vector<T> d)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (b_.size() != a_.size() || c_.size() != a_.size() ||
        d_.size() != a_.size()) {
      throw ContractViolation("QuatBlock component arrays differ in length");
    }
  }

  static QuatBlock identity(std::size_t m) {
    QuatBlock q(m);
    std::fill(q.a_.begin(), q.a_.end(), T{1});
    return q;
  }

  static QuatBlock single(T a, T b, T c, T d) {
    return QuatBlock({a}, {b}, {c}, {d});
  }

  std::size_t size() const { return a_.size(); }

  const std::vector<T>& a() const { return a_; }
  const std::vector<T>& b() const { return b_; }
  const std::vector<T>& c() const { return c_; }
  const std::vector<T>& d() const { return d_; }

  QuatSpan<T> view() { return {a_, b_, c_, d_}; }
  QuatSpan<const T> view() const { return {a_, b_, c_, d_}; }

  friend bool operator==(const QuatBlock&, const QuatBlock&) = default;

 private:
  std::vector<T> a_, b_, c_, d_;
};

namespace internal {

template <typename T>
void check_same_size(std::size_t m, const QuatSpan<T>& q, const char* what) {
  if (q.a.size() != m || q.b.size() != m || q.c.size() != m ||
      q.d.size() != m) {
    throw ContractViolation(std::string(what) + ": expected " +
                            std::to_string(m) + " quaternions");
  }
}

}  // namespace internal

// out_i = x_i (x) y_i. `out` may alias either operand.
template <typename T>
void hamilton_product(QuatSpan<const T> x, QuatSpan<const T> y,
                      QuatSpan<T> out) {
  const std::size_t m = x.size();
  internal::check_same_size(m, x, "hamilton_product lhs");
  internal::check_same_size(m, y, "hamilton_product rhs");
  internal::check_same_size(m, out, "hamilton_product out");
  for (std::size_t i = 0; i < m; ++i) {
    const T a1 = x.a[i], b1 = x.b[i], c1 = x.c[i], d1 = x.d[i];
    const T a2 = y.a[i], b2 = y.b[i], c2 = y.c[i], d2 = y.d[i];
    out.a[i] = a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2;
    out.b[i] = a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2;
    out.c[i] = a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2;
    out.d[i] = a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2;
  }
}

// The product is bilinear, so with p = x (x) y and upstream g:
//   dL/dx = g (x) conj(y),   dL/dy = conj(x) (x) g.
template <typename T>
void hamilton_product_backward(QuatSpan<const T> x, QuatSpan<const T> y,
                               QuatSpan<const T> upstream, QuatSpan<T> grad_x,
                               QuatSpan<T> grad_y) {
  const std::size_t m = x.size();
  internal::check_same_size(m, y, "hamilton_product_backward rhs");
  internal::check_same_size(m, upstream, "hamilton_product_backward upstream");
  internal::check_same_size(m, grad_x, "hamilton_product_backward grad_x");
  internal::check_same_size(m, grad_y, "hamilton_product_backward grad_y");
  for (std::size_t i = 0; i < m; ++i) {
    const T a1 = x.a[i], b1 = x.b[i], c1 = x.c[i], d1 = x.d[i];
    const T a2 = y.a[i], b2 = y.b[i], c2 = y.c[i], d2 = y.d[i];
    const T ga = upstream.a[i], gb = upstream.b[i], gc = upstream.c[i],
            gd = upstream.d[i];
    grad_x.a[i] += ga * a2 + gb * b2 + gc * c2 + gd * d2;
    grad_x.b[i] += -ga * b2 + gb * a2 - gc * d2 + gd * c2;
    grad_x.c[i] += -ga * c2 + gb * d2 + gc * a2 - gd * b2;
    grad_x.d[i] += -ga * d2 - gb * c2 + gc * b2 + gd * a2;

    grad_y.a[i] += a1 * ga + b1 * gb + c1 * gc + d1 * gd;
    grad_y.b[i] += a1 * gb - b1 * ga - c1 * gd + d1 * gc;
    grad_y.c[i] += a1 * gc + b1 * gd - c1 * ga - d1 * gb;
    grad_y.d[i] += a1 * gd - b1 * gc + c1 * gb - d1 * ga;
  }
}

template <typename T>
void quat_norms(QuatSpan<const T> q, std::span<T> out) {
  const std::size_t m = q.size();
  internal::check_same_size(m, q, "quat_norms");
  if (out.size() != m) throw ContractViolation("quat_norms: output length");
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = std::sqrt(q.a[i] * q.a[i] + q.b[i] * q.b[i] + q.c[i] * q.c[i] +
                       q.d[i] * q.d[i]);
  }
}

// out_i = q_i / sqrt(|q_i|^2 + eps). `out` may alias `q`.
template <typename T>
void normalize(QuatSpan<const T> q, T eps, QuatSpan<T> out) {
  const std::size_t m = q.size();
  internal::check_same_size(m, q, "normalize");
  internal::check_same_size(m, out, "normalize out");
  if (!(eps > T{0})) throw ContractViolation("normalize: eps must be > 0");
  for (std::size_t i = 0; i < m; ++i) {
    const T a = q.a[i], b = q.b[i], c = q.c[i], d = q.d[i];
    const T inv = T{1} / std::sqrt(a * a + b * b + c * c + d * d + eps);
    out.a[i] = a * inv;
    out.b[i] = b * inv;
    out.c[i] = c * inv;
    out.d[i] = d * inv;
  }
}

// With s = sqrt(|q|^2 + eps): dL/dq = g / s - q (q . g) / s^3.
template <typename T>
void normalize_backward(QuatSpan<const T> q, T eps,
                        QuatSpan<const T> upstream, QuatSpan<T> grad_q) {
  const std::size_t m = q.size();
  internal::check_same_size(m, upstream, "normalize_backward upstream");
  internal::check_same_size(m, grad_q, "normalize_backward grad");
  if (!(eps > T{0})) {
    throw ContractViolation("normalize_backward: eps must be > 0");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const T a = q.a[i], b = q.b[i], c = q.c[i], d = q.d[i];
    const T inv = T{1} / std::sqrt(a * a + b * b + c * c + d * d + eps);
    const T dot = a * upstream.a[i] + b * upstream.b[i] + c * upstream.c[i] +
                  d * upstream.d[i];
    const T radial = dot * inv * inv * inv;
    grad_q.a[i] += upstream.a[i] * inv - a * radial;
    grad_q.b[i] += upstream.b[i] * inv - b * radial;
    grad_q.c[i] += upstream.c[i] * inv - c * radial;
    grad_q.d[i] += upstream.d[i] * inv - d * radial;
  }
}

// Value-returning conveniences over owning blocks.

template <typename T>
QuatBlock<T> hamilton_product(const QuatBlock<T>& x, const QuatBlock<T>& y) {
  QuatBlock<T> out(x.size());
  hamilton_product<T>(x.view(), y.view(), out.view());
  return out;
}

template <typename T>
std::pair<QuatBlock<T>, QuatBlock<T>> hamilton_product_backward(
    const QuatBlock<T>& x, const QuatBlock<T>& y, const QuatBlock<T>& upstream) {
  QuatBlock<T> gx(x.size()), gy(x.size());
  hamilton_product_backward<T>(x.view(), y.view(), upstream.view(), gx.view(),
                               gy.view());
  return {std::move(gx), std::move(gy)};
}

template <typename T>
QuatBlock<T> normalize(const QuatBlock<T>& q, T eps = T(kNormalizeEps)) {
  QuatBlock<T> out(q.size());
  normalize<T>(q.view(), eps, out.view());
  return out;
}

template <typename T>
QuatBlock<T> normalize_backward(const QuatBlock<T>& q, T eps,
                                const QuatBlock<T>& upstream) {
  QuatBlock<T> g(q.size());
  normalize_backward<T>(q.view(), eps, upstream.view(), g.view());
  return g;
}

template <typename T>
std::vector<T> quat_norms(const QuatBlock<T>& q) {
  std::vector<T> out(q.size());
  quat_norms<T>(q.view(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Complex-plane counterparts used by the Hadamard variants.

template <typename T>
struct ComplexSpan {
  std::span<T> re, im;

  std::size_t size() const { return re.size(); }

  operator ComplexSpan<const T>() const
    requires(!std::is_const_v<T>)
  {
    return {re, im};
  }
};

template <typename T>
ComplexSpan<T> as_complex(std::span<T> row) {
  if (row.size() % 2 != 0) {
    throw ContractViolation("complex row width " + std::to_string(row.size()) +
                            " is not divisible by 2");
  }
  const std::size_t m = row.size() / 2;
  return {row.subspan(0, m), row.subspan(m, m)};
}

namespace internal {

template <typename T>
void check_same_size(std::size_t m, const ComplexSpan<T>& z, const char* what) {
  if (z.re.size() != m || z.im.size() != m) {
    throw ContractViolation(std::string(what) + ": expected " +
                            std::to_string(m) + " complex coordinates");
  }
}

}  // namespace internal

template <typename T>
void complex_product(ComplexSpan<const T> x, ComplexSpan<const T> y,
                     ComplexSpan<T> out) {
  const std::size_t m = x.size();
  internal::check_same_size(m, x, "complex_product lhs");
  internal::check_same_size(m, y, "complex_product rhs");
  internal::check_same_size(m, out, "complex_product out");
  for (std::size_t i = 0; i < m; ++i) {
    const T xr = x.re[i], xi = x.im[i], yr = y.re[i], yi = y.im[i];
    out.re[i] = xr * yr - xi * yi;
    out.im[i] = xr * yi + xi * yr;
  }
}

// dL/dx = g * conj(y), dL/dy = conj(x) * g.
template <typename T>
void complex_product_backward(ComplexSpan<const T> x, ComplexSpan<const T> y,
                              ComplexSpan<const T> upstream,
                              ComplexSpan<T> grad_x, ComplexSpan<T> grad_y) {
  const std::size_t m = x.size();
  internal::check_same_size(m, y, "complex_product_backward rhs");
  internal::check_same_size(m, upstream, "complex_product_backward upstream");
  internal::check_same_size(m, grad_x, "complex_product_backward grad_x");
  internal::check_same_size(m, grad_y, "complex_product_backward grad_y");
  for (std::size_t i = 0; i < m; ++i) {
    const T xr = x.re[i], xi = x.im[i], yr = y.re[i], yi = y.im[i];
    const T gr = upstream.re[i], gi = upstream.im[i];
    grad_x.re[i] += gr * yr + gi * yi;
    grad_x.im[i] += gi * yr - gr * yi;
    grad_y.re[i] += xr * gr + xi * gi;
    grad_y.im[i] += xr * gi - xi * gr;
  }
}

template <typename T>
void complex_normalize(ComplexSpan<const T> z, T eps, ComplexSpan<T> out) {
  const std::size_t m = z.size();
  internal::check_same_size(m, z, "complex_normalize");
  internal::check_same_size(m, out, "complex_normalize out");
  for (std::size_t i = 0; i < m; ++i) {
    const T re = z.re[i], im = z.im[i];
    const T inv = T{1} / std::sqrt(re * re + im * im + eps);
    out.re[i] = re * inv;
    out.im[i] = im * inv;
  }
}

template <typename T>
void complex_normalize_backward(ComplexSpan<const T> z, T eps,
                                ComplexSpan<const T> upstream,
                                ComplexSpan<T> grad_z) {
  const std::size_t m = z.size();
  internal::check_same_size(m, upstream, "complex_normalize_backward upstream");
  internal::check_same_size(m, grad_z, "complex_normalize_backward grad");
  for (std::size_t i = 0; i < m; ++i) {
    const T re = z.re[i], im = z.im[i];
    const T inv = T{1} / std::sqrt(re * re + im * im + eps);
    const T radial = (re * upstream.re[i] + im * upstream.im[i]) * inv * inv * inv;
    grad_z.re[i] += upstream.re[i] * inv - re * radial;
    grad_z.im[i] += upstream.im[i] * inv - im * radial;
  }
}

}  // namespace quatkgc

#endif  // QUATKGC_QUAT_ALGEBRA_H_
