#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rfa {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), residual_(achieved_residual) {}
  [[nodiscard]] double achieved_residual() const { return residual_; }

 private:
  double residual_;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Duplicate triplets are summed in insertion
/// order, so assembly is reproducible for a fixed element order.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n), row_ptr_(static_cast<std::size_t>(n) + 1, 0) {}

  static SparseMatrix from_triplets(int n, std::vector<Triplet> t) {
    std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(n);
    for (std::size_t k = 0; k < t.size();) {
      const int r = t[k].row, c = t[k].col;
      if (r < 0 || r >= n || c < 0 || c >= n) throw std::out_of_range("triplet outside matrix");
      double sum = 0.0;
      for (; k < t.size() && t[k].row == r && t[k].col == c; ++k) sum += t[k].value;
      m.col_.push_back(c);
      m.val_.push_back(sum);
      ++m.row_ptr_[static_cast<std::size_t>(r) + 1];
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
  }

  static SparseMatrix identity(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, std::move(t));
  }

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] std::size_t nonzeros() const { return val_.size(); }
  [[nodiscard]] std::span<const int> row_ptr() const { return row_ptr_; }
  [[nodiscard]] std::span<const int> cols() const { return col_; }
  [[nodiscard]] std::span<const double> values() const { return val_; }

  [[nodiscard]] double operator()(int i, int j) const {
    const auto b = col_.begin() + row_ptr_[i], e = col_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
      y[i] = s;
    }
  }
  [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(n_));
    multiply(x, y);
    return y;
  }

  [[nodiscard]] std::vector<double> diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) d[i] = (*this)(i, i);
    return d;
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : val_) m = std::max(m, std::abs(v));
    return m;
  }

  [[nodiscard]] double asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        worst = std::max(worst, std::abs(val_[k] - (*this)(col_[k], i)));
    return worst;
  }

  [[nodiscard]] double sum() const { return std::accumulate(val_.begin(), val_.end(), 0.0); }

  [[nodiscard]] std::vector<Triplet> triplets() const {
    std::vector<Triplet> t;
    t.reserve(val_.size());
    for (int i = 0; i < n_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({i, col_[k], val_[k]});
    return t;
  }

  [[nodiscard]] SparseMatrix scaled(double s) const {
    SparseMatrix m = *this;
    for (double& v : m.val_) v *= s;
    return m;
  }

  /// Returns sum_k weight_k * term_k over matrices of equal size.
  static SparseMatrix combine(std::initializer_list<std::pair<double, const SparseMatrix*>> terms) {
    int n = -1;
    std::vector<Triplet> t;
    for (const auto& [w, m] : terms) {
      if (n >= 0 && m->size() != n) throw std::invalid_argument("combine: size mismatch");
      n = m->size();
      for (auto x : m->triplets()) t.push_back({x.row, x.col, w * x.value});
    }
    return from_triplets(std::max(n, 0), std::move(t));
  }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double residual_norm(const SparseMatrix& A, std::span<const double> x, std::span<const double> b) {
  std::vector<double> r = A * x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r);
}

struct SolveReport {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws SolverError when the
/// iteration cap is hit or a non-positive curvature direction shows the matrix
/// is not positive definite.
inline SolveReport solve_spd(const SparseMatrix& A, std::span<const double> b, double tol = 1e-10,
                             int max_iterations = 0) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("solve_spd: tol must lie in (0, 1)");
  const int n = A.size();
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_spd: size mismatch");
  if (max_iterations <= 0) max_iterations = std::max(100, 10 * n);
  SolveReport rep;
  rep.x.assign(static_cast<std::size_t>(n), 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return rep;

  std::vector<double> inv_diag = A.diagonal();
  for (int i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) throw SolverError("solve_spd: non-positive diagonal at row " + std::to_string(i), 1.0);
    inv_diag[i] = 1.0 / inv_diag[i];
  }
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iterations; ++it) {
    A.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0))
      throw SolverError("solve_spd: matrix is not positive definite (p'Ap <= 0)", norm2(r) / bnorm);
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      rep.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    const double rel = norm2(r) / bnorm;
    if (rel <= tol) {
      // confirm against the true residual, which drifts from the recurrence
      rep.relative_residual = residual_norm(A, rep.x, b) / bnorm;
      if (rep.relative_residual <= tol) {
        rep.iterations = it;
        return rep;
      }
      r.assign(b.begin(), b.end());
      std::vector<double> ax = A * rep.x;
      for (int i = 0; i < n; ++i) r[i] -= ax[i];
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("solve_spd: no convergence within " + std::to_string(max_iterations) + " iterations",
                    residual_norm(A, rep.x, b) / bnorm);
}

/// Sparse LDL^T factorization for repeated solves with one matrix.
class SpdFactorization {
 public:
  SpdFactorization() = default;
  explicit SpdFactorization(const SparseMatrix& A) : A_(A) {
    Eigen::SparseMatrix<double> E(A.size(), A.size());
    std::vector<Eigen::Triplet<double>> et;
    for (const auto& t : A.triplets()) et.emplace_back(t.row, t.col, t.value);
    E.setFromTriplets(et.begin(), et.end());
    ldlt_.compute(E);
    if (ldlt_.info() != Eigen::Success) throw SolverError("factorization failed", 1.0);
    const auto d = ldlt_.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d[i] > 0.0)) throw SolverError("factorization: matrix is not positive definite", 1.0);
  }

  [[nodiscard]] int size() const { return A_.size(); }
  [[nodiscard]] const SparseMatrix& matrix() const { return A_; }

  /// Solves A x = b; throws if the relative residual exceeds tol.
  [[nodiscard]] std::vector<double> solve(std::span<const double> b, double tol = 1e-10) const {
    Eigen::Map<const Eigen::VectorXd> eb(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd ex = ldlt_.solve(eb);
    std::vector<double> x(ex.data(), ex.data() + ex.size());
    const double bnorm = norm2(b);
    if (bnorm > 0.0) {
      const double rel = residual_norm(A_, x, b) / bnorm;
      if (!(rel <= tol)) throw SolverError("factorized solve: residual above tolerance", rel);
    }
    return x;
  }

 private:
  SparseMatrix A_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Splits the unknowns of a square system into free and prescribed sets and
/// forms the free-free block, folding prescribed values into the load.
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SparseMatrix& A, std::span<const char> prescribed) : full_(A) {
    const int n = A.size();
    free_index_.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i)
      if (!prescribed[i]) {
        free_index_[i] = static_cast<int>(free_.size());
        free_.push_back(i);
      }
    std::vector<Triplet> ff;
    for (const auto& t : A.triplets()) {
      const int fi = free_index_[t.row], fj = free_index_[t.col];
      if (fi >= 0 && fj >= 0) ff.push_back({fi, fj, t.value});
    }
    reduced_ = SparseMatrix::from_triplets(static_cast<int>(free_.size()), std::move(ff));
  }

  [[nodiscard]] const SparseMatrix& reduced() const { return reduced_; }
  [[nodiscard]] const SparseMatrix& full() const { return full_; }
  [[nodiscard]] std::span<const int> free_dofs() const { return free_; }
  [[nodiscard]] bool is_free(int dof) const { return free_index_[dof] >= 0; }

  /// b_f - A_fc u_c, with u holding the prescribed values.
  [[nodiscard]] std::vector<double> reduce_rhs(std::span<const double> b, std::span<const double> u) const {
    std::vector<double> out(free_.size());
    const auto rp = full_.row_ptr();
    const auto cols = full_.cols();
    const auto vals = full_.values();
    for (std::size_t f = 0; f < free_.size(); ++f) {
      const int i = free_[f];
      double s = b[i];
      for (int k = rp[i]; k < rp[i + 1]; ++k)
        if (free_index_[cols[k]] < 0) s -= vals[k] * u[cols[k]];
      out[f] = s;
    }
    return out;
  }

  /// Writes free values into u (prescribed entries are left untouched).
  void expand(std::span<const double> x_free, std::span<double> u) const {
    for (std::size_t f = 0; f < free_.size(); ++f) u[free_[f]] = x_free[f];
  }

 private:
  SparseMatrix full_;
  SparseMatrix reduced_;
  std::vector<int> free_;
  std::vector<int> free_index_;
};

}  // namespace rfa
