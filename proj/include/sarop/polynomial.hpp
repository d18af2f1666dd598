#pragma once

// Sparse multivariate polynomials over complex double coefficients, a named
// variable registry, square systems, and a compiled flat-term form used by
// the path tracker.  Exponent vectors always have registry length; terms
// with exactly zero coefficient are never stored.

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sarop {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Exponents = std::vector<int>;

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int n_vars) : n_vars_(n_vars) {}

  static Polynomial constant(int n_vars, Complex value);
  static Polynomial variable(int n_vars, int index);

  int n_vars() const { return n_vars_; }
  bool is_zero() const { return terms_.empty(); }
  // Total degree of the largest term; -1 for the zero polynomial.
  int degree() const;
  const std::map<Exponents, Complex>& terms() const { return terms_; }

  // Adds coeff * x^exponents, erasing the term if the sum cancels exactly.
  void add_term(const Exponents& exponents, Complex coeff);

  Polynomial derivative(int var) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(Complex scale);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, Complex s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  // Real-scalar evaluation uses the real part of each coefficient; callers
  // restrict it to real-coefficient polynomials.
  template <typename Scalar>
  Scalar evaluate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& point) const {
    if (point.size() != n_vars_)
      throw std::invalid_argument("Polynomial::evaluate: point length mismatch");
    Scalar acc = Scalar(0);
    for (const auto& [exps, coeff] : terms_) {
      Scalar term;
      if constexpr (std::is_same_v<Scalar, Complex>)
        term = coeff;
      else
        term = Scalar(coeff.real());
      for (int v = 0; v < n_vars_; ++v)
        for (int e = 0; e < exps[v]; ++e) term *= point[v];
      acc += term;
    }
    return acc;
  }

 private:
  int n_vars_ = 0;
  std::map<Exponents, Complex> terms_;
};

// Ordered unique variable names; the index of a name is its coordinate in
// every evaluation point.
class VariableRegistry {
 public:
  int add(const std::string& name);         // throws on duplicates
  int index(const std::string& name) const; // throws when absent
  const std::string& name(int i) const { return names_.at(i); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> lookup_;
};

struct PolySystem {
  VariableRegistry registry;
  std::vector<Polynomial> equations;

  int n_vars() const { return registry.size(); }
  int size() const { return static_cast<int>(equations.size()); }
  bool is_square() const { return size() == n_vars(); }
};

// Reference evaluation of all equations / all first derivatives.
CVector evaluate(const PolySystem& system, const CVector& point);
CMatrix jacobian(const PolySystem& system, const CVector& point);

// Product of the total degrees; throws std::invalid_argument on non-square
// systems or when a zero polynomial is present.
unsigned long long bezout_number(const PolySystem& system);

// Flat-term form: one pass over the terms of an equation produces the value
// and the gradient row together, which is the hot loop of path tracking.
class CompiledSystem {
 public:
  // Degree cap per term; enough for every system built here (quadratics and
  // small start-system powers).
  static constexpr int kMaxTermDegree = 8;

  struct Term {
    Complex coeff;
    int n = 0;                 // number of variable factors
    int var[kMaxTermDegree];   // variable index per factor, repeats allowed
  };

  CompiledSystem() = default;
  explicit CompiledSystem(const PolySystem& system);

  int size() const { return static_cast<int>(equations_.size()); }
  int n_vars() const { return n_vars_; }

  void evaluate(const CVector& point, CVector& out) const;
  // Value and Jacobian in one pass.
  void evaluate_with_jacobian(const CVector& point, CVector& value,
                              CMatrix& jac) const;

 private:
  int n_vars_ = 0;
  std::vector<std::vector<Term>> equations_;
};

}  // namespace sarop
