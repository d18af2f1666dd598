#include "sarop/polynomial.hpp"

#include <climits>
#include <numeric>
#include <stdexcept>

namespace sarop {

Polynomial Polynomial::constant(int n_vars, Complex value) {
  Polynomial p(n_vars);
  p.add_term(Exponents(n_vars, 0), value);
  return p;
}

Polynomial Polynomial::variable(int n_vars, int index) {
  if (index < 0 || index >= n_vars)
    throw std::invalid_argument("Polynomial::variable: index out of range");
  Polynomial p(n_vars);
  Exponents e(n_vars, 0);
  e[index] = 1;
  p.add_term(e, Complex(1.0));
  return p;
}

int Polynomial::degree() const {
  int deg = -1;
  for (const auto& [exps, coeff] : terms_)
    deg = std::max(deg, std::accumulate(exps.begin(), exps.end(), 0));
  return deg;
}

void Polynomial::add_term(const Exponents& exponents, Complex coeff) {
  if (static_cast<int>(exponents.size()) != n_vars_)
    throw std::invalid_argument("Polynomial::add_term: exponent length mismatch");
  if (coeff == Complex(0.0)) return;
  auto [it, inserted] = terms_.try_emplace(exponents, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == Complex(0.0)) terms_.erase(it);
  }
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= n_vars_)
    throw std::invalid_argument("Polynomial::derivative: index out of range");
  Polynomial out(n_vars_);
  for (const auto& [exps, coeff] : terms_) {
    if (exps[var] == 0) continue;
    Exponents e = exps;
    e[var] -= 1;
    out.add_term(e, coeff * static_cast<double>(exps[var]));
  }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.n_vars_ != n_vars_)
    throw std::invalid_argument("Polynomial: mixed variable counts");
  for (const auto& [exps, coeff] : other.terms_) add_term(exps, coeff);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.n_vars_ != n_vars_)
    throw std::invalid_argument("Polynomial: mixed variable counts");
  for (const auto& [exps, coeff] : other.terms_) add_term(exps, -coeff);
  return *this;
}

Polynomial& Polynomial::operator*=(Complex scale) {
  if (scale == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [exps, coeff] : terms_) coeff *= scale;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.n_vars_ != b.n_vars_)
    throw std::invalid_argument("Polynomial: mixed variable counts");
  Polynomial out(a.n_vars_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Exponents e(a.n_vars_);
      for (int v = 0; v < a.n_vars_; ++v) e[v] = ea[v] + eb[v];
      out.add_term(e, ca * cb);
    }
  return out;
}

int VariableRegistry::add(const std::string& name) {
  if (lookup_.count(name))
    throw std::invalid_argument("VariableRegistry: duplicate name " + name);
  lookup_[name] = static_cast<int>(names_.size());
  names_.push_back(name);
  return static_cast<int>(names_.size()) - 1;
}

int VariableRegistry::index(const std::string& name) const {
  auto it = lookup_.find(name);
  if (it == lookup_.end())
    throw std::invalid_argument("VariableRegistry: unknown name " + name);
  return it->second;
}

CVector evaluate(const PolySystem& system, const CVector& point) {
  if (point.size() != system.n_vars())
    throw std::invalid_argument("evaluate: point length mismatch");
  CVector out(system.size());
  for (int i = 0; i < system.size(); ++i)
    out[i] = system.equations[i].evaluate<Complex>(point);
  return out;
}

CMatrix jacobian(const PolySystem& system, const CVector& point) {
  if (point.size() != system.n_vars())
    throw std::invalid_argument("jacobian: point length mismatch");
  CMatrix out(system.size(), system.n_vars());
  for (int i = 0; i < system.size(); ++i)
    for (int v = 0; v < system.n_vars(); ++v)
      out(i, v) = system.equations[i].derivative(v).evaluate<Complex>(point);
  return out;
}

unsigned long long bezout_number(const PolySystem& system) {
  if (!system.is_square())
    throw std::invalid_argument("bezout_number: system is not square");
  unsigned long long acc = 1;
  for (const auto& eq : system.equations) {
    const int d = eq.degree();
    if (d < 0)
      throw std::invalid_argument("bezout_number: zero equation present");
    if (d > 0) {
      if (acc > ULLONG_MAX / static_cast<unsigned long long>(d))
        throw std::overflow_error("bezout_number: product exceeds 64-bit range");
      acc *= static_cast<unsigned long long>(d);
    }
  }
  return acc;
}

CompiledSystem::CompiledSystem(const PolySystem& system)
    : n_vars_(system.n_vars()) {
  equations_.reserve(system.size());
  for (const auto& eq : system.equations) {
    std::vector<Term> flat;
    flat.reserve(eq.terms().size());
    for (const auto& [exps, coeff] : eq.terms()) {
      Term t;
      t.coeff = coeff;
      for (int v = 0; v < n_vars_; ++v)
        for (int e = 0; e < exps[v]; ++e) {
          if (t.n == kMaxTermDegree)
            throw std::invalid_argument(
                "CompiledSystem: term degree exceeds compiled cap");
          t.var[t.n++] = v;
        }
      flat.push_back(t);
    }
    equations_.push_back(std::move(flat));
  }
}

void CompiledSystem::evaluate(const CVector& point, CVector& out) const {
  out.resize(size());
  for (int i = 0; i < size(); ++i) {
    Complex acc(0.0);
    for (const Term& t : equations_[i]) {
      Complex prod = t.coeff;
      for (int k = 0; k < t.n; ++k) prod *= point[t.var[k]];
      acc += prod;
    }
    out[i] = acc;
  }
}

void CompiledSystem::evaluate_with_jacobian(const CVector& point,
                                            CVector& value,
                                            CMatrix& jac) const {
  value.resize(size());
  jac.setZero(size(), n_vars_);
  for (int i = 0; i < size(); ++i) {
    Complex acc(0.0);
    for (const Term& t : equations_[i]) {
      Complex prod = t.coeff;
      for (int k = 0; k < t.n; ++k) prod *= point[t.var[k]];
      acc += prod;
      // d(term)/d(var at position k) = coeff * product of the other factors.
      for (int k = 0; k < t.n; ++k) {
        Complex partial = t.coeff;
        for (int j = 0; j < t.n; ++j)
          if (j != k) partial *= point[t.var[j]];
        jac(i, t.var[k]) += partial;
      }
    }
    value[i] = acc;
  }
}

}  // namespace sarop
