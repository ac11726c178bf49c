#ifndef KSGFLOW_SPARSE_HPP
#define KSGFLOW_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace ksgflow {

// CSR structure shared between matrices assembled on the same mesh. Both
// triangles are stored; the diagonal entry exists in every row.
struct SparsityPattern {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<int> diag;  // position of (i,i) in col/values

  bool same_as(const SparsityPattern& other) const {
    return this == &other || (n == other.n && row_ptr == other.row_ptr && col == other.col);
  }
};

struct SparseSymMatrix {
  std::shared_ptr<const SparsityPattern> pattern;
  std::vector<double> values;

  int rows() const { return pattern ? pattern->n : 0; }
  std::size_t nnz() const { return values.size(); }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const auto& p = *pattern;
    y.assign(p.n, 0.0);
    for (int i = 0; i < p.n; ++i) {
      double s = 0.0;
      for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
        s += values[k] * x[p.col[k]];
      y[i] = s;
    }
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y;
    apply(x, y);
    return y;
  }

  double coeff(int i, int j) const {
    const auto& p = *pattern;
    const int* first = p.col.data() + p.row_ptr[i];
    const int* last = p.col.data() + p.row_ptr[i + 1];
    const int* it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values[it - p.col.data()];
  }

  std::vector<double> diagonal() const {
    const auto& p = *pattern;
    std::vector<double> d(p.n);
    for (int i = 0; i < p.n; ++i) d[i] = values[p.diag[i]];
    return d;
  }

  // Largest |a_ij - a_ji|; zero for the matrices assembled here.
  double max_asymmetry() const {
    const auto& p = *pattern;
    double worst = 0.0;
    for (int i = 0; i < p.n; ++i)
      for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
        int j = p.col[k];
        if (j < i) continue;
        worst = std::max(worst, std::abs(values[k] - coeff(j, i)));
      }
    return worst;
  }
};

// Accumulates (i, j, value) contributions, then compresses to CSR with both
// triangles stored and duplicates summed. The diagonal is always present.
class TripletAccumulator {
 public:
  explicit TripletAccumulator(int n) : n_(n) {
    if (n < 0) throw std::invalid_argument("TripletAccumulator: negative size");
  }

  void add(int i, int j, double v) { trips_.emplace_back(i, j, v); }

  SparseSymMatrix compress() const {
    std::vector<std::tuple<int, int, double>> t = trips_;
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, 0.0);
    // stable: duplicates of (i,j) and (j,i) then sum in the same order, so
    // symmetric element contributions stay bitwise symmetric
    std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                              : std::get<1>(a) < std::get<1>(b);
    });

    auto pattern = std::make_shared<SparsityPattern>();
    pattern->n = n_;
    pattern->row_ptr.assign(n_ + 1, 0);
    SparseSymMatrix m;
    m.values.reserve(t.size());
    int prev_i = -1, prev_j = -1;
    for (const auto& [i, j, v] : t) {
      if (i < 0 || i >= n_ || j < 0 || j >= n_)
        throw std::out_of_range("TripletAccumulator: index outside matrix");
      if (i == prev_i && j == prev_j) {
        m.values.back() += v;
        continue;
      }
      pattern->col.push_back(j);
      m.values.push_back(v);
      ++pattern->row_ptr[i + 1];
      prev_i = i;
      prev_j = j;
    }
    for (int i = 0; i < n_; ++i) pattern->row_ptr[i + 1] += pattern->row_ptr[i];
    pattern->diag.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const int* first = pattern->col.data() + pattern->row_ptr[i];
      const int* last = pattern->col.data() + pattern->row_ptr[i + 1];
      const int* it = std::lower_bound(first, last, i);
      pattern->diag[i] = static_cast<int>(it - pattern->col.data());
    }
    m.pattern = std::move(pattern);
    return m;
  }

 private:
  int n_;
  std::vector<std::tuple<int, int, double>> trips_;
};

// alpha*A + beta*B for matrices with identical sparsity structure.
inline SparseSymMatrix linear_combination(double alpha, const SparseSymMatrix& a,
                                          double beta, const SparseSymMatrix& b) {
  if (!a.pattern->same_as(*b.pattern))
    throw std::invalid_argument("linear_combination: sparsity patterns differ");
  SparseSymMatrix out;
  out.pattern = a.pattern;
  out.values.resize(a.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k)
    out.values[k] = alpha * a.values[k] + beta * b.values[k];
  return out;
}

inline void add_to_diagonal(SparseSymMatrix& a, const std::vector<double>& d,
                            double scale = 1.0) {
  const auto& p = *a.pattern;
  if (static_cast<int>(d.size()) != p.n)
    throw std::invalid_argument("add_to_diagonal: length mismatch");
  for (int i = 0; i < p.n; ++i) a.values[p.diag[i]] += scale * d[i];
}

}  // namespace ksgflow

#endif
