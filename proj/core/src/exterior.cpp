#include "g2cal/exterior.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace g2cal {

namespace detail {

int binomial(int n, int k) {
  static constexpr int table[8][8] = {
      {1, 0, 0, 0, 0, 0, 0, 0},       {1, 1, 0, 0, 0, 0, 0, 0},
      {1, 2, 1, 0, 0, 0, 0, 0},       {1, 3, 3, 1, 0, 0, 0, 0},
      {1, 4, 6, 4, 1, 0, 0, 0},       {1, 5, 10, 10, 5, 1, 0, 0},
      {1, 6, 15, 20, 15, 6, 1, 0},    {1, 7, 21, 35, 35, 21, 7, 1}};
  if (n < 0 || k < 0 || n > 7 || k > n) return 0;
  return table[n][k];
}

std::size_t subsetRank(int n, std::span<const int> sorted) {
  // Lexicographic rank via the combinatorial number system.
  std::size_t rank = 0;
  int prev = -1;
  const int k = static_cast<int>(sorted.size());
  for (int i = 0; i < k; ++i) {
    for (int v = prev + 1; v < sorted[i]; ++v)
      rank += binomial(n - 1 - v, k - 1 - i);
    prev = sorted[i];
  }
  return rank;
}

int sortWithSign(std::span<const int> indices,
                 std::array<int, AlternatingForm::kMaxDim>& out) {
  const int k = static_cast<int>(indices.size());
  std::copy(indices.begin(), indices.end(), out.begin());
  int sign = 1;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (out[i] == out[j]) return 0;
      if (out[i] > out[j]) {
        std::swap(out[i], out[j]);
        sign = -sign;
      }
    }
  }
  return sign;
}

}  // namespace detail

AlternatingForm::AlternatingForm(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 0 || dim > kMaxDim || degree < 0 || degree > dim)
    throw std::invalid_argument("AlternatingForm: bad dim/degree");
  coeffs_.assign(detail::binomial(dim, degree), 0.0);
}

AlternatingForm AlternatingForm::covector(int dim, int index) {
  AlternatingForm f(dim, 1);
  f.coeffs_[static_cast<std::size_t>(index)] = 1.0;
  return f;
}

double AlternatingForm::coefficient(std::span<const int> indices) const {
  assert(static_cast<int>(indices.size()) == degree_);
  std::array<int, kMaxDim> sorted{};
  const int sign = detail::sortWithSign(indices, sorted);
  if (sign == 0) return 0.0;
  return sign * coeffs_[detail::subsetRank(dim_, {sorted.data(), indices.size()})];
}

void AlternatingForm::add(std::span<const int> indices, double value) {
  assert(static_cast<int>(indices.size()) == degree_);
  std::array<int, kMaxDim> sorted{};
  const int sign = detail::sortWithSign(indices, sorted);
  if (sign == 0) return;
  coeffs_[detail::subsetRank(dim_, {sorted.data(), indices.size()})] += sign * value;
}

double AlternatingForm::operator()(std::span<const Eigen::VectorXd> vectors) const {
  assert(static_cast<int>(vectors.size()) == degree_);
  if (degree_ == 0) return coeffs_[0];
  double total = 0.0;
  Eigen::MatrixXd minor(degree_, degree_);
  std::size_t rank = 0;
  std::vector<int> idx(degree_);
  for (int i = 0; i < degree_; ++i) idx[i] = i;
  while (true) {
    if (coeffs_[rank] != 0.0) {
      for (int r = 0; r < degree_; ++r)
        for (int c = 0; c < degree_; ++c) minor(r, c) = vectors[r](idx[c]);
      total += coeffs_[rank] * minor.determinant();
    }
    // next k-subset in lexicographic order
    int i = degree_ - 1;
    while (i >= 0 && idx[i] == dim_ - degree_ + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < degree_; ++j) idx[j] = idx[j - 1] + 1;
    ++rank;
  }
  return total;
}

AlternatingForm& AlternatingForm::operator+=(const AlternatingForm& other) {
  assert(dim_ == other.dim_ && degree_ == other.degree_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

AlternatingForm operator-(const AlternatingForm& a, const AlternatingForm& b) {
  AlternatingForm r = a;
  r += -1.0 * b;
  return r;
}

double AlternatingForm::maxAbsCoeff() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

std::vector<int> AlternatingForm::indicesAtRank(std::size_t rank) const {
  std::vector<int> idx(degree_);
  for (int i = 0; i < degree_; ++i) idx[i] = i;
  for (std::size_t r = 0; r < rank; ++r) {
    int i = degree_ - 1;
    while (i >= 0 && idx[i] == dim_ - degree_ + i) --i;
    ++idx[i];
    for (int j = i + 1; j < degree_; ++j) idx[j] = idx[j - 1] + 1;
  }
  return idx;
}

AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b) {
  assert(a.dim() == b.dim());
  AlternatingForm result(a.dim(), a.degree() + b.degree());
  const int ka = a.degree(), kb = b.degree();
  std::vector<int> merged(ka + kb);
  for (std::size_t ra = 0; ra < a.size(); ++ra) {
    if (a.coeff(ra) == 0.0) continue;
    const std::vector<int> ia = a.indicesAtRank(ra);
    for (std::size_t rb = 0; rb < b.size(); ++rb) {
      if (b.coeff(rb) == 0.0) continue;
      const std::vector<int> ib = b.indicesAtRank(rb);
      std::copy(ia.begin(), ia.end(), merged.begin());
      std::copy(ib.begin(), ib.end(), merged.begin() + ka);
      result.add(merged, a.coeff(ra) * b.coeff(rb));
    }
  }
  return result;
}

AlternatingForm contract(const AlternatingForm& form, const Eigen::VectorXd& v) {
  assert(form.degree() >= 1 && v.size() == form.dim());
  AlternatingForm result(form.dim(), form.degree() - 1);
  std::vector<int> rest(form.degree() - 1);
  for (std::size_t r = 0; r < form.size(); ++r) {
    if (form.coeff(r) == 0.0) continue;
    const std::vector<int> idx = form.indicesAtRank(r);
    int sign = 1;
    for (int pos = 0; pos < form.degree(); ++pos) {
      if (v(idx[pos]) != 0.0) {
        int w = 0;
        for (int m = 0; m < form.degree(); ++m)
          if (m != pos) rest[w++] = idx[m];
        result.add(rest, sign * v(idx[pos]) * form.coeff(r));
      }
      sign = -sign;
    }
  }
  return result;
}

AlternatingForm hodgeStar(const AlternatingForm& form, const Eigen::MatrixXd& g,
                          double volume_scale) {
  const int n = form.dim();
  const int k = form.degree();
  const Eigen::MatrixXd ginv = g.inverse();
  AlternatingForm result(n, n - k);

  std::vector<int> complement(n - k);
  std::vector<int> both(n);
  Eigen::MatrixXd minor(k, k);
  const std::size_t nk = static_cast<std::size_t>(detail::binomial(n, k));

  for (std::size_t rI = 0; rI < nk; ++rI) {
    AlternatingForm probe(n, k);
    probe.coeff(rI) = 1.0;
    const std::vector<int> I = probe.indicesAtRank(rI);
    // raise the k indices: Omega^I = sum_J det(ginv[I, J]) c_J
    double raised = 0.0;
    for (std::size_t rJ = 0; rJ < nk; ++rJ) {
      if (form.coeff(rJ) == 0.0) continue;
      const std::vector<int> J = form.indicesAtRank(rJ);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) minor(r, c) = ginv(I[r], J[c]);
      raised += (k > 0 ? minor.determinant() : 1.0) * form.coeff(rJ);
    }
    if (raised == 0.0) continue;
    int w = 0;
    for (int v = 0; v < n; ++v) {
      bool in = std::find(I.begin(), I.end(), v) != I.end();
      if (!in) complement[w++] = v;
    }
    std::copy(I.begin(), I.end(), both.begin());
    std::copy(complement.begin(), complement.end(), both.begin() + k);
    std::array<int, AlternatingForm::kMaxDim> scratch{};
    const int sign = detail::sortWithSign(both, scratch);
    result.add(complement, volume_scale * sign * raised);
  }
  return result;
}

}  // namespace g2cal
