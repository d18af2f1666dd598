#include "sarop/polynomial.hpp"

#include <doctest.h>

#include <random>

#include "sarop/random.hpp"

using namespace sarop;

namespace {

Polynomial random_poly(int n_vars, int max_degree, int n_terms,
                       std::mt19937_64& gen) {
  Polynomial p(n_vars);
  for (int t = 0; t < n_terms; ++t) {
    Exponents e(n_vars, 0);
    int budget = max_degree;
    for (int v = 0; v < n_vars && budget > 0; ++v) {
      const int d = static_cast<int>(gen() % (budget + 1));
      e[v] = d;
      budget -= d;
    }
    p.add_term(e, Complex(sample_normal(gen), sample_normal(gen)));
  }
  return p;
}

CVector random_point(int n, std::mt19937_64& gen) {
  CVector x(n);
  for (int i = 0; i < n; ++i) x[i] = Complex(sample_normal(gen), sample_normal(gen));
  return x;
}

}  // namespace

TEST_CASE("zero polynomial evaluates to zero and has degree -1") {
  PolySystem sys;
  sys.registry.add("x");
  sys.equations.push_back(Polynomial(1));
  const CVector v = evaluate(sys, CVector::Constant(1, Complex(3.0, -1.0)));
  CHECK(v[0] == Complex(0.0));
  CHECK(sys.equations[0].degree() == -1);
  CHECK(sys.equations[0].is_zero());
}

TEST_CASE("xy - 1 vanishes at (2, 1/2)") {
  Polynomial p(2);
  p.add_term({1, 1}, Complex(1.0));
  p.add_term({0, 0}, Complex(-1.0));
  CVector x(2);
  x << Complex(2.0), Complex(0.5);
  CHECK(std::abs(p.evaluate<Complex>(x)) == 0.0);
  CHECK(p.degree() == 2);
}

TEST_CASE("exact cancellation removes stored terms") {
  std::mt19937_64 gen(1);
  const Polynomial p = random_poly(3, 3, 8, gen);
  Polynomial q = p;
  q -= p;
  CHECK(q.is_zero());
  Polynomial r = p;
  r *= Complex(0.0);
  CHECK(r.is_zero());
}

TEST_CASE("arithmetic agrees with pointwise arithmetic") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Polynomial p = random_poly(3, 3, 6, gen);
    const Polynomial q = random_poly(3, 2, 5, gen);
    const CVector x = random_point(3, gen);
    const Complex px = p.evaluate<Complex>(x), qx = q.evaluate<Complex>(x);
    CHECK(std::abs((p + q).evaluate<Complex>(x) - (px + qx)) < 1e-12);
    CHECK(std::abs((p - q).evaluate<Complex>(x) - (px - qx)) < 1e-12);
    CHECK(std::abs((p * q).evaluate<Complex>(x) - px * qx) < 1e-10);
  }
}

TEST_CASE("derivative obeys the product rule") {
  std::mt19937_64 gen(3);
  const Polynomial p = random_poly(2, 2, 4, gen);
  const Polynomial q = random_poly(2, 2, 4, gen);
  const Polynomial lhs = (p * q).derivative(0);
  const Polynomial rhs = p.derivative(0) * q + p * q.derivative(0);
  const CVector x = random_point(2, gen);
  CHECK(std::abs(lhs.evaluate<Complex>(x) - rhs.evaluate<Complex>(x)) < 1e-10);
}

TEST_CASE("real-scalar evaluation matches the complex path") {
  Polynomial p(2);
  p.add_term({2, 0}, Complex(1.5));
  p.add_term({0, 1}, Complex(-2.0));
  Eigen::VectorXd x(2);
  x << 3.0, 0.25;
  CHECK(p.evaluate<double>(x) == doctest::Approx(1.5 * 9.0 - 0.5));
}

TEST_CASE("jacobian agrees with central differences") {
  std::mt19937_64 gen(4);
  PolySystem sys;
  for (int v = 0; v < 3; ++v) sys.registry.add("x" + std::to_string(v));
  for (int i = 0; i < 3; ++i) sys.equations.push_back(random_poly(3, 3, 6, gen));
  const CVector x = random_point(3, gen);
  const CMatrix jac = jacobian(sys, x);
  const double h = 1e-6;
  for (int v = 0; v < 3; ++v) {
    CVector hi = x, lo = x;
    hi[v] += h;
    lo[v] -= h;
    const CVector diff = (evaluate(sys, hi) - evaluate(sys, lo)) / (2.0 * h);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(diff[i] - jac(i, v)) < 1e-8);
  }
}

TEST_CASE("bezout numbers") {
  PolySystem linear;
  for (int v = 0; v < 4; ++v) linear.registry.add("x" + std::to_string(v));
  for (int i = 0; i < 4; ++i) {
    Polynomial p(4);
    Exponents e(4, 0);
    e[i] = 1;
    p.add_term(e, Complex(2.0));
    p.add_term(Exponents(4, 0), Complex(-1.0));
    linear.equations.push_back(p);
  }
  CHECK(bezout_number(linear) == 1);

  PolySystem mixed;
  mixed.registry.add("x");
  mixed.registry.add("y");
  Polynomial quad(2);
  quad.add_term({2, 0}, Complex(1.0));
  Polynomial lin(2);
  lin.add_term({0, 1}, Complex(1.0));
  mixed.equations = {quad, lin};
  CHECK(bezout_number(mixed) == 2);

  PolySystem zero_eq = mixed;
  zero_eq.equations[1] = Polynomial(2);
  CHECK_THROWS_AS(bezout_number(zero_eq), std::invalid_argument);

  PolySystem tall = mixed;
  tall.equations.push_back(lin);
  CHECK_THROWS_AS(bezout_number(tall), std::invalid_argument);
}

TEST_CASE("registry rejects duplicates and resolves names") {
  VariableRegistry reg;
  CHECK(reg.add("eta_0") == 0);
  CHECK(reg.add("eta_1") == 1);
  CHECK(reg.index("eta_1") == 1);
  CHECK_THROWS_AS(reg.add("eta_0"), std::invalid_argument);
  CHECK_THROWS_AS(reg.index("nope"), std::invalid_argument);
}

TEST_CASE("compiled form reproduces reference evaluation and jacobian") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    PolySystem sys;
    const int n = 4;
    for (int v = 0; v < n; ++v) sys.registry.add("x" + std::to_string(v));
    for (int i = 0; i < n; ++i) sys.equations.push_back(random_poly(n, 3, 7, gen));
    const CompiledSystem compiled(sys);
    const CVector x = random_point(n, gen);
    CVector value;
    CMatrix jac;
    compiled.evaluate_with_jacobian(x, value, jac);
    CHECK((value - evaluate(sys, x)).norm() < 1e-12);
    CHECK((jac - jacobian(sys, x)).norm() < 1e-12);
    CVector value_only;
    compiled.evaluate(x, value_only);
    CHECK((value_only - value).norm() == 0.0);
  }
}

TEST_CASE("evaluation rejects mismatched point lengths") {
  PolySystem sys;
  sys.registry.add("x");
  sys.equations.push_back(Polynomial::variable(1, 0));
  CHECK_THROWS_AS(evaluate(sys, CVector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(jacobian(sys, CVector::Zero(2)), std::invalid_argument);
}
