#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace g2cal {

/// Alternating multilinear form on R^n (n <= 7), stored by its coefficients
/// on strictly increasing index tuples, ordered lexicographically.
/// Antisymmetry is structural: only sorted keys are stored, and access with
/// an unsorted (or repeated) tuple resolves through the permutation sign.
class AlternatingForm {
public:
  static constexpr int kMaxDim = 7;

  AlternatingForm(int dim, int degree);

  /// The basis covector e^index.
  static AlternatingForm covector(int dim, int index);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return coeffs_.size(); }

  double& coeff(std::size_t rank) { return coeffs_[rank]; }
  double coeff(std::size_t rank) const { return coeffs_[rank]; }

  /// Coefficient addressed by an arbitrary index tuple; sign of the sorting
  /// permutation applied, 0 on repeated indices.
  double coefficient(std::span<const int> indices) const;
  void add(std::span<const int> indices, double value);

  /// Evaluate on `degree()` vectors (each of length dim()).
  double operator()(std::span<const Eigen::VectorXd> vectors) const;

  AlternatingForm& operator+=(const AlternatingForm& other);
  AlternatingForm& operator*=(double s);
  friend AlternatingForm operator+(AlternatingForm a, const AlternatingForm& b) {
    a += b;
    return a;
  }
  friend AlternatingForm operator-(const AlternatingForm& a, const AlternatingForm& b);
  friend AlternatingForm operator*(double s, AlternatingForm f) {
    f *= s;
    return f;
  }

  double maxAbsCoeff() const;

  /// The sorted index tuple at a given lexicographic rank.
  std::vector<int> indicesAtRank(std::size_t rank) const;

private:
  int dim_;
  int degree_;
  std::vector<double> coeffs_;
};

AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b);

/// Interior product v -| form (v into the first slot).
AlternatingForm contract(const AlternatingForm& form, const Eigen::VectorXd& v);

/// Hodge star with respect to a metric g and a signed volume coefficient:
/// the volume form is vol = volume_scale * e^{0...n-1}. A negative scale
/// encodes the orientation opposite to the coordinate order.
AlternatingForm hodgeStar(const AlternatingForm& form, const Eigen::MatrixXd& g,
                          double volume_scale);

namespace detail {
/// C(n, k) for n, k <= 7.
int binomial(int n, int k);
/// Lexicographic rank of a strictly increasing tuple among k-subsets of {0..n-1}.
std::size_t subsetRank(int n, std::span<const int> sorted);
/// Sign of the permutation sorting `indices`; 0 if a repeat occurs.
/// Sorted result written to `out`.
int sortWithSign(std::span<const int> indices, std::array<int, AlternatingForm::kMaxDim>& out);
}  // namespace detail

}  // namespace g2cal
