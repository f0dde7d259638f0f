// Copyright 2026 The Biped Gait Authors
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

// Forward-mode dual numbers with a compile-time number of seed directions.
//
// Dual<N> carries a value and N partial derivatives. All arithmetic follows
// the sum, product and chain rules, so any expression written generically
// over the scalar type yields exact first derivatives alongside its value.

#ifndef BIPED_DUAL_H_
#define BIPED_DUAL_H_

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace biped::ad {

// Thrown when a primitive is evaluated where it has no derivative.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <int N>
struct Dual {
  static_assert(N > 0, "Dual needs at least one seed direction");
  using Derivs = Eigen::Matrix<double, N, 1>;

  double value = 0.0;
  Derivs derivs = Derivs::Zero();

  Dual() = default;
  // Implicit so constants mix freely with duals in generic code.
  Dual(double v) : value(v) {}  // NOLINT(runtime/explicit)
  Dual(double v, const Derivs& d) : value(v), derivs(d) {}

  static Dual Variable(double v, int direction) {
    Dual r(v);
    r.derivs[direction] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    value += o.value;
    derivs += o.derivs;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value -= o.value;
    derivs -= o.derivs;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    derivs = derivs * o.value + o.derivs * value;
    value *= o.value;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.value;
    value *= inv;
    derivs = (derivs - value * o.derivs) * inv;
    return *this;
  }
  Dual& operator+=(double s) {
    value += s;
    return *this;
  }
  Dual& operator-=(double s) {
    value -= s;
    return *this;
  }
  Dual& operator*=(double s) {
    value *= s;
    derivs *= s;
    return *this;
  }
  Dual& operator/=(double s) {
    value /= s;
    derivs /= s;
    return *this;
  }
};

template <int N>
inline Dual<N> operator-(const Dual<N>& a) {
  return Dual<N>(-a.value, -a.derivs);
}
template <int N>
inline Dual<N> operator+(const Dual<N>& a) {
  return a;
}

template <int N>
inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) {
  return a += b;
}
template <int N>
inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) {
  return a -= b;
}
template <int N>
inline Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  return Dual<N>(a.value * b.value, a.derivs * b.value + b.derivs * a.value);
}
template <int N>
inline Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  const double inv = 1.0 / b.value;
  const double v = a.value * inv;
  return Dual<N>(v, (a.derivs - v * b.derivs) * inv);
}

template <int N>
inline Dual<N> operator+(Dual<N> a, double s) {
  return a += s;
}
template <int N>
inline Dual<N> operator+(double s, Dual<N> a) {
  return a += s;
}
template <int N>
inline Dual<N> operator-(Dual<N> a, double s) {
  return a -= s;
}
template <int N>
inline Dual<N> operator-(double s, const Dual<N>& a) {
  return Dual<N>(s - a.value, -a.derivs);
}
template <int N>
inline Dual<N> operator*(Dual<N> a, double s) {
  return a *= s;
}
template <int N>
inline Dual<N> operator*(double s, Dual<N> a) {
  return a *= s;
}
template <int N>
inline Dual<N> operator/(Dual<N> a, double s) {
  return a /= s;
}
template <int N>
inline Dual<N> operator/(double s, const Dual<N>& a) {
  const double inv = 1.0 / a.value;
  return Dual<N>(s * inv, (-s * inv * inv) * a.derivs);
}

// Comparisons look at the value part only.
template <int N>
inline bool operator<(const Dual<N>& a, const Dual<N>& b) {
  return a.value < b.value;
}
template <int N>
inline bool operator>(const Dual<N>& a, const Dual<N>& b) {
  return a.value > b.value;
}
template <int N>
inline bool operator<=(const Dual<N>& a, const Dual<N>& b) {
  return a.value <= b.value;
}
template <int N>
inline bool operator>=(const Dual<N>& a, const Dual<N>& b) {
  return a.value >= b.value;
}
template <int N>
inline bool operator==(const Dual<N>& a, const Dual<N>& b) {
  return a.value == b.value;
}
template <int N>
inline bool operator!=(const Dual<N>& a, const Dual<N>& b) {
  return a.value != b.value;
}

template <int N>
inline Dual<N> sin(const Dual<N>& a) {
  return Dual<N>(std::sin(a.value), std::cos(a.value) * a.derivs);
}
template <int N>
inline Dual<N> cos(const Dual<N>& a) {
  return Dual<N>(std::cos(a.value), -std::sin(a.value) * a.derivs);
}
template <int N>
inline Dual<N> sqrt(const Dual<N>& a) {
  if (!(a.value > 0.0)) {
    throw DomainError("sqrt is not differentiable at " +
                      std::to_string(a.value));
  }
  const double r = std::sqrt(a.value);
  return Dual<N>(r, (0.5 / r) * a.derivs);
}

template <int N>
inline double ValueOf(const Dual<N>& a) {
  return a.value;
}
inline double ValueOf(double a) { return a; }

// |x| smoothed as sqrt(x^2 + eps_sq). The only non-polynomial absolute value
// admitted in differentiated code; eps_sq must be positive.
template <typename T>
inline T SmoothAbs(const T& x, double eps_sq) {
  using std::sqrt;
  if (!(eps_sq > 0.0)) {
    throw DomainError("SmoothAbs needs a positive regularization");
  }
  return sqrt(x * x + eps_sq);
}

template <int N>
std::ostream& operator<<(std::ostream& os, const Dual<N>& a) {
  return os << a.value << " [" << a.derivs.transpose() << "]";
}

}  // namespace biped::ad

namespace Eigen {

template <int N>
struct NumTraits<biped::ad::Dual<N>> : GenericNumTraits<biped::ad::Dual<N>> {
  using Real = biped::ad::Dual<N>;
  using NonInteger = biped::ad::Dual<N>;
  using Nested = biped::ad::Dual<N>;
  using Literal = biped::ad::Dual<N>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = N + 1,
    MulCost = 2 * N + 1,
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() {
    return Real(NumTraits<double>::dummy_precision());
  }
  static inline Real highest() { return Real(NumTraits<double>::highest()); }
  static inline Real lowest() { return Real(NumTraits<double>::lowest()); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<biped::ad::Dual<N>, double, BinaryOp> {
  using ReturnType = biped::ad::Dual<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, biped::ad::Dual<N>, BinaryOp> {
  using ReturnType = biped::ad::Dual<N>;
};

}  // namespace Eigen

#endif  // BIPED_DUAL_H_
