#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kdvlab {

using Rational = boost::rational<std::int64_t>;

/// Sorted multiset of derivative orders; {0, 1, 1} stands for u (u')^2.
using Orders = std::vector<int>;

/// Differential polynomial in u, u', u'', ... with exact rational coefficients.
/// Each term is coeff * prod_i u^(orders_i). Zero coefficients are pruned and
/// every multiset appears at most once.
class DensityPolynomial {
 public:
  using TermMap = std::map<Orders, Rational>;

  DensityPolynomial() = default;

  static DensityPolynomial monomial(Rational coeff, Orders orders);
  /// The single term u^(order).
  static DensityPolynomial u(int order = 0);

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  /// Coefficient of the given multiset (zero if absent).
  Rational coefficient(Orders orders) const;
  /// Highest derivative order present, -1 for the zero polynomial.
  int max_order() const;

  void add_term(Rational coeff, Orders orders);

  DensityPolynomial& operator+=(const DensityPolynomial& other);
  DensityPolynomial& operator-=(const DensityPolynomial& other);
  DensityPolynomial& operator*=(Rational s);

  /// Total x-derivative (Leibniz rule on every factor).
  DensityPolynomial derivative() const;

  /// e.g. "1/2 u''^2 + 5 u u'^2 + 5/2 u^4"; factors with order > 3 print as u^(k).
  std::string to_string() const;

  friend bool operator==(const DensityPolynomial&, const DensityPolynomial&) = default;

 private:
  TermMap terms_;
};

DensityPolynomial operator+(DensityPolynomial a, const DensityPolynomial& b);
DensityPolynomial operator-(DensityPolynomial a, const DensityPolynomial& b);
DensityPolynomial operator*(Rational s, DensityPolynomial p);
DensityPolynomial operator*(const DensityPolynomial& a, const DensityPolynomial& b);

}  // namespace kdvlab
