#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgbkit/constants.hpp"
#include "cgbkit/errors.hpp"

namespace cgbkit {

// Increasing multi-index over {0..d-1}, bit i set <=> index i present.
using MultiIndex = std::uint64_t;

inline constexpr int kMaxFormDimension = 64;

namespace detail {

// Parity of the shuffle that sorts the concatenation (a, b) of two disjoint
// increasing multi-indices: number of pairs x in a, y in b with x > y.
inline int shuffle_parity(MultiIndex a, MultiIndex b) {
  int count = 0;
  while (b != 0) {
    int y = std::countr_zero(b);
    b &= b - 1;
    count += std::popcount(y >= 63 ? MultiIndex{0} : (a >> (y + 1)));
  }
  return count & 1;
}

inline MultiIndex full_mask(int p) { return p >= 64 ? ~MultiIndex{0} : ((MultiIndex{1} << p) - 1); }

// Parity of a permutation given as a list of images.
inline int permutation_parity(std::span<const int> perm) {
  std::vector<bool> seen(perm.size(), false);
  int parity = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    parity ^= static_cast<int>((len + 1) & 1);
  }
  return parity;
}

}  // namespace detail

// Grade-p alternating multilinear form on R^d with sparse coefficients on
// the basis theta_I = theta_{i1} ^ ... ^ theta_{ip}, i1 < ... < ip. Evaluation
// uses the determinant convention: theta_I(v_1..v_p) = det[theta_{i_a}(v_b)].
class AlternatingForm {
 public:
  struct Term {
    MultiIndex index;
    double coefficient;
  };

  AlternatingForm() : AlternatingForm(1, 0) {}

  AlternatingForm(int dimension, int grade) : dimension_(dimension), grade_(grade) {
    if (dimension < 1 || dimension > kMaxFormDimension)
      throw InvalidArgument("form dimension must be in [1, 64], got " + std::to_string(dimension));
    if (grade < 0) throw InvalidArgument("form grade must be nonnegative");
  }

  static AlternatingForm scalar(int dimension, double c) {
    AlternatingForm f(dimension, 0);
    f.terms_.push_back({0, c});
    f.canonicalize();
    return f;
  }

  // theta_{i1} ^ ... ^ theta_{ip} for indices in any order (zero on repeats).
  static AlternatingForm basis(int dimension, std::initializer_list<int> indices, double c = 1.0) {
    std::vector<int> idx(indices);
    AlternatingForm f(dimension, static_cast<int>(idx.size()));
    MultiIndex mask = 0;
    int parity = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] < 0 || idx[a] >= dimension) throw InvalidArgument("basis index out of range");
      MultiIndex bit = MultiIndex{1} << idx[a];
      if (mask & bit) return f;
      parity ^= detail::shuffle_parity(mask, bit);
      mask |= bit;
    }
    f.terms_.push_back({mask, parity ? -c : c});
    f.canonicalize();
    return f;
  }

  static AlternatingForm covector(std::span<const double> components) {
    AlternatingForm f(static_cast<int>(components.size()), 1);
    for (std::size_t i = 0; i < components.size(); ++i)
      f.terms_.push_back({MultiIndex{1} << i, components[i]});
    f.canonicalize();
    return f;
  }

  // Builds from raw (index, coefficient) terms; duplicates are summed.
  static AlternatingForm from_terms(int dimension, int grade, std::vector<Term> terms) {
    AlternatingForm f(dimension, grade);
    for (const auto& t : terms) {
      if (std::popcount(t.index) != grade) throw InvalidArgument("multi-index does not match grade");
      if (dimension < 64 && (t.index >> dimension) != 0) throw InvalidArgument("multi-index exceeds dimension");
    }
    f.terms_ = std::move(terms);
    f.canonicalize();
    return f;
  }

  int dimension() const { return dimension_; }
  int grade() const { return grade_; }
  std::span<const Term> terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double coefficient(MultiIndex index) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), index,
                               [](const Term& t, MultiIndex m) { return t.index < m; });
    return (it != terms_.end() && it->index == index) ? it->coefficient : 0.0;
  }

  // Coefficient of theta_0 ^ ... ^ theta_{d-1}; the value on the standard frame.
  double top_coefficient() const { return grade_ == dimension_ ? coefficient(detail::full_mask(dimension_)) : 0.0; }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coefficient));
    return m;
  }

  AlternatingForm& operator+=(const AlternatingForm& o) {
    check_compatible(o);
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    canonicalize();
    return *this;
  }
  AlternatingForm& operator-=(const AlternatingForm& o) { return *this += (-1.0) * o; }
  AlternatingForm& operator*=(double s) {
    for (auto& t : terms_) t.coefficient *= s;
    canonicalize();
    return *this;
  }

  friend AlternatingForm operator+(AlternatingForm a, const AlternatingForm& b) { return a += b; }
  friend AlternatingForm operator-(AlternatingForm a, const AlternatingForm& b) { return a -= b; }
  friend AlternatingForm operator*(double s, AlternatingForm a) { return a *= s; }
  friend AlternatingForm operator*(AlternatingForm a, double s) { return a *= s; }

 private:
  friend AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b);

  void check_compatible(const AlternatingForm& o) const {
    if (o.dimension_ != dimension_ || o.grade_ != grade_)
      throw InvalidArgument("adding forms of different dimension or grade");
  }

  void canonicalize() {
    if (grade_ > dimension_) {
      terms_.clear();
      return;
    }
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.index < b.index; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < terms_.size();) {
      MultiIndex idx = terms_[i].index;
      double sum = 0.0;
      for (; i < terms_.size() && terms_[i].index == idx; ++i) sum += terms_[i].coefficient;
      if (std::abs(sum) >= tol::coefficient_floor) terms_[out++] = {idx, sum};
    }
    terms_.resize(out);
  }

  int dimension_;
  int grade_;
  std::vector<Term> terms_;
};

inline AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b) {
  if (a.dimension_ != b.dimension_) throw InvalidArgument("wedge of forms over different dimensions");
  AlternatingForm out(a.dimension_, a.grade_ + b.grade_);
  if (out.grade_ > out.dimension_) return out;
  out.terms_.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      if (ta.index & tb.index) continue;
      double c = ta.coefficient * tb.coefficient;
      out.terms_.push_back({ta.index | tb.index, detail::shuffle_parity(ta.index, tb.index) ? -c : c});
    }
  }
  out.canonicalize();
  return out;
}

// Value of the form on p vectors given as the columns of a d x p matrix.
inline double evaluate(const AlternatingForm& form, const Eigen::MatrixXd& vectors) {
  if (vectors.cols() != form.grade())
    throw InvalidArgument("evaluate: expected " + std::to_string(form.grade()) + " vectors, got " +
                          std::to_string(vectors.cols()));
  if (vectors.rows() != form.dimension()) throw InvalidArgument("evaluate: vector length does not match dimension");
  const int p = form.grade();
  if (p == 0) return form.coefficient(0);
  double sum = 0.0;
  Eigen::MatrixXd minor(p, p);
  for (const auto& t : form.terms()) {
    MultiIndex m = t.index;
    for (int row = 0; m != 0; ++row, m &= m - 1) minor.row(row) = vectors.row(std::countr_zero(m));
    sum += t.coefficient * (p == 1 ? minor(0, 0) : minor.determinant());
  }
  return sum;
}

inline double evaluate(const AlternatingForm& form, std::span<const Eigen::VectorXd> vectors) {
  Eigen::MatrixXd m(form.dimension(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != form.dimension())
      throw InvalidArgument("evaluate: vector length does not match dimension");
    m.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return evaluate(form, m);
}

// Skew k x k matrix of 2-forms over a common dimension d.
class TwoFormMatrix {
 public:
  TwoFormMatrix(int size, int dimension)
      : size_(size), dimension_(dimension),
        entries_(static_cast<std::size_t>(size) * size, AlternatingForm(dimension, 2)) {
    if (size < 1) throw InvalidArgument("two-form matrix size must be positive");
  }

  // Validates grades, dimensions and skew-symmetry to tol::skew.
  TwoFormMatrix(int size, std::vector<AlternatingForm> entries) : size_(size) {
    if (size < 1 || entries.size() != static_cast<std::size_t>(size) * size)
      throw InvalidArgument("two-form matrix needs size*size entries");
    dimension_ = entries.front().dimension();
    for (const auto& e : entries)
      if (e.grade() != 2 || e.dimension() != dimension_)
        throw InvalidArgument("two-form matrix entries must be 2-forms over a common dimension");
    entries_ = std::move(entries);
    for (int i = 0; i < size_; ++i)
      for (int j = i; j < size_; ++j)
        if ((at(i, j) + at(j, i)).max_abs_coefficient() > tol::skew)
          throw InvalidArgument("two-form matrix is not skew-symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
  }

  int size() const { return size_; }
  int dimension() const { return dimension_; }
  const AlternatingForm& operator()(int i, int j) const { return at(i, j); }

  // Sets entry (i, j) and its mirror (j, i) = -form.
  void set(int i, int j, const AlternatingForm& form) {
    if (form.grade() != 2 || form.dimension() != dimension_) throw InvalidArgument("entry must be a 2-form");
    if (i == j) throw InvalidArgument("diagonal entries of a skew matrix are zero");
    entries_[index(i, j)] = form;
    entries_[index(j, i)] = -1.0 * form;
  }

 private:
  const AlternatingForm& at(int i, int j) const { return entries_[index(i, j)]; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * size_ + j; }

  int size_;
  int dimension_;
  std::vector<AlternatingForm> entries_;
};

// Omega -> G^T Omega G, entrywise (G^T Omega G)_ij = sum_ab G_ai Omega_ab G_bj.
inline TwoFormMatrix conjugate(const TwoFormMatrix& omega, const Eigen::MatrixXd& g) {
  const int k = omega.size();
  if (g.rows() != k || g.cols() != k) throw InvalidArgument("conjugate: matrix size mismatch");
  TwoFormMatrix out(k, omega.dimension());
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      AlternatingForm acc(omega.dimension(), 2);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          if (a != b && g(a, i) * g(b, j) != 0.0) acc += (g(a, i) * g(b, j)) * omega(a, b);
      out.set(i, j, acc);
    }
  return out;
}

enum class PfaffianMethod { naive, matching, subset_dp };

namespace detail {

inline AlternatingForm pfaffian_naive(const TwoFormMatrix& omega) {
  const int k = omega.size();
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  AlternatingForm sum(omega.dimension(), k);
  do {
    AlternatingForm term = omega(perm[0], perm[1]);
    for (int a = 2; a < k; a += 2) term = wedge(term, omega(perm[a], perm[a + 1]));
    sum += permutation_parity(perm) ? -1.0 * term : term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

struct Matching {
  std::vector<std::pair<int, int>> pairs;
  int sign;
};

// All perfect matchings of `remaining`, pairing its lowest element first.
inline void enumerate_matchings(MultiIndex remaining, Matching& current, std::vector<Matching>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  int i = std::countr_zero(remaining);
  MultiIndex rest = remaining & (remaining - 1);
  int position = 0;
  for (MultiIndex m = rest; m != 0; m &= m - 1, ++position) {
    int j = std::countr_zero(m);
    current.pairs.emplace_back(i, j);
    int saved = current.sign;
    if (position & 1) current.sign = -current.sign;
    enumerate_matchings(rest & ~(MultiIndex{1} << j), current, out);
    current.sign = saved;
    current.pairs.pop_back();
  }
}

inline double matching_multiplicity(int k) { return factorial(k / 2) * std::ldexp(1.0, k / 2); }

inline AlternatingForm pfaffian_matching(const TwoFormMatrix& omega) {
  const int k = omega.size();
  std::vector<Matching> matchings;
  Matching current{{}, 1};
  enumerate_matchings(full_mask(k), current, matchings);
  AlternatingForm sum(omega.dimension(), k);
  for (const auto& m : matchings) {
    AlternatingForm term = omega(m.pairs[0].first, m.pairs[0].second);
    for (std::size_t a = 1; a < m.pairs.size(); ++a) term = wedge(term, omega(m.pairs[a].first, m.pairs[a].second));
    sum += m.sign > 0 ? term : -1.0 * term;
  }
  return matching_multiplicity(k) * sum;
}

inline const AlternatingForm& pfaffian_subset(const TwoFormMatrix& omega, MultiIndex remaining,
                                              std::vector<std::optional<AlternatingForm>>& memo) {
  auto& slot = memo[remaining];
  if (slot) return *slot;
  const int d = omega.dimension();
  if (remaining == 0) {
    slot = AlternatingForm::scalar(d, 1.0);
    return *slot;
  }
  int i = std::countr_zero(remaining);
  MultiIndex rest = remaining & (remaining - 1);
  AlternatingForm acc(d, std::popcount(remaining));
  int position = 0;
  for (MultiIndex m = rest; m != 0; m &= m - 1, ++position) {
    int j = std::countr_zero(m);
    AlternatingForm term = wedge(omega(i, j), pfaffian_subset(omega, rest & ~(MultiIndex{1} << j), memo));
    acc += (position & 1) ? -1.0 * term : term;
  }
  slot = std::move(acc);
  return *slot;
}

inline AlternatingForm pfaffian_dp(const TwoFormMatrix& omega) {
  const int k = omega.size();
  std::vector<std::optional<AlternatingForm>> memo(std::size_t{1} << k);
  return matching_multiplicity(k) * pfaffian_subset(omega, full_mask(k), memo);
}

}  // namespace detail

inline constexpr int kMaxPfaffianSize = 24;

// Pfaffian k-form sum_{sigma in S_k} sgn(sigma) Omega_{s1 s2} ^ ... ^ Omega_{s(k-1) sk},
// without the 1/k! normalization.
inline AlternatingForm pfaffian_form(const TwoFormMatrix& omega, PfaffianMethod method = PfaffianMethod::subset_dp) {
  const int k = omega.size();
  if (k % 2 != 0) throw InvalidArgument("pfaffian of odd-size matrix (k=" + std::to_string(k) + ")");
  if (k > kMaxPfaffianSize) throw InvalidArgument("pfaffian size exceeds " + std::to_string(kMaxPfaffianSize));
  switch (method) {
    case PfaffianMethod::naive:
      return detail::pfaffian_naive(omega);
    case PfaffianMethod::matching:
      return detail::pfaffian_matching(omega);
    case PfaffianMethod::subset_dp:
      break;
  }
  return detail::pfaffian_dp(omega);
}

}  // namespace cgbkit
