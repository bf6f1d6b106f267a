#include "kdvlab/density.hpp"

#include <algorithm>
#include <sstream>

namespace kdvlab {

DensityPolynomial DensityPolynomial::monomial(Rational coeff, Orders orders) {
  DensityPolynomial p;
  p.add_term(coeff, std::move(orders));
  return p;
}

DensityPolynomial DensityPolynomial::u(int order) { return monomial(Rational(1), Orders{order}); }

Rational DensityPolynomial::coefficient(Orders orders) const {
  std::sort(orders.begin(), orders.end());
  const auto it = terms_.find(orders);
  return it == terms_.end() ? Rational(0) : it->second;
}

int DensityPolynomial::max_order() const {
  int m = -1;
  for (const auto& [orders, coeff] : terms_)
    if (!orders.empty()) m = std::max(m, orders.back());
  return m;
}

void DensityPolynomial::add_term(Rational coeff, Orders orders) {
  if (coeff.numerator() == 0) return;
  std::sort(orders.begin(), orders.end());
  auto [it, inserted] = terms_.try_emplace(std::move(orders), coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.numerator() == 0) terms_.erase(it);
  }
}

DensityPolynomial& DensityPolynomial::operator+=(const DensityPolynomial& other) {
  for (const auto& [orders, coeff] : other.terms_) add_term(coeff, orders);
  return *this;
}

DensityPolynomial& DensityPolynomial::operator-=(const DensityPolynomial& other) {
  for (const auto& [orders, coeff] : other.terms_) add_term(-coeff, orders);
  return *this;
}

DensityPolynomial& DensityPolynomial::operator*=(Rational s) {
  if (s.numerator() == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [orders, coeff] : terms_) coeff *= s;
  return *this;
}

DensityPolynomial DensityPolynomial::derivative() const {
  DensityPolynomial out;
  for (const auto& [orders, coeff] : terms_) {
    // Equal orders give identical Leibniz summands; differentiate each distinct
    // order once and weight by its multiplicity.
    for (std::size_t i = 0; i < orders.size();) {
      std::size_t j = i;
      while (j < orders.size() && orders[j] == orders[i]) ++j;
      Orders next = orders;
      next[i] += 1;
      out.add_term(coeff * Rational(static_cast<std::int64_t>(j - i)), std::move(next));
      i = j;
    }
  }
  return out;
}

namespace {

std::string factor_name(int order) {
  if (order <= 3) return "u" + std::string(static_cast<std::size_t>(order), '\'');
  return "u^(" + std::to_string(order) + ")";
}

}  // namespace

std::string DensityPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  // Highest total order first reads closest to the conventional display.
  std::vector<std::pair<Orders, Rational>> sorted(terms_.begin(), terms_.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    int sa = 0, sb = 0;
    for (int o : a.first) sa += o;
    for (int o : b.first) sb += o;
    return sa != sb ? sa > sb : a.first.size() < b.first.size();
  });
  for (const auto& [orders, coeff] : sorted) {
    Rational c = coeff;
    if (!first) out << (c.numerator() < 0 ? " - " : " + ");
    else if (c.numerator() < 0) out << "-";
    if (c.numerator() < 0) c = -c;
    first = false;
    const bool unit = (c == Rational(1));
    if (!unit) {
      out << c.numerator();
      if (c.denominator() != 1) out << '/' << c.denominator();
    }
    if (orders.empty()) {
      if (unit) out << 1;
      continue;
    }
    bool first_factor = true;
    for (std::size_t i = 0; i < orders.size();) {
      std::size_t j = i;
      while (j < orders.size() && orders[j] == orders[i]) ++j;
      if (!unit || !first_factor) out << ' ';
      out << factor_name(orders[i]);
      if (j - i > 1) out << '^' << (j - i);
      first_factor = false;
      i = j;
    }
  }
  return out.str();
}

DensityPolynomial operator+(DensityPolynomial a, const DensityPolynomial& b) { return a += b; }
DensityPolynomial operator-(DensityPolynomial a, const DensityPolynomial& b) { return a -= b; }
DensityPolynomial operator*(Rational s, DensityPolynomial p) { return p *= s; }

DensityPolynomial operator*(const DensityPolynomial& a, const DensityPolynomial& b) {
  DensityPolynomial out;
  for (const auto& [oa, ca] : a.terms()) {
    for (const auto& [ob, cb] : b.terms()) {
      Orders merged;
      merged.reserve(oa.size() + ob.size());
      std::merge(oa.begin(), oa.end(), ob.begin(), ob.end(), std::back_inserter(merged));
      out.add_term(ca * cb, std::move(merged));
    }
  }
  return out;
}

}  // namespace kdvlab
