#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "wardrop/rational.hpp"

namespace wardrop {

using VecR = std::vector<Rat>;

// Small dense rational matrix, row major. All arithmetic is exact.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
  Mat(std::size_t rows, std::size_t cols, std::initializer_list<Rat> vals)
      : rows_(rows), cols_(cols), a_(vals) {
    if (a_.size() != rows * cols) throw InvariantError("Mat: bad initializer size");
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rat& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Rat& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
  }
  friend bool operator!=(const Mat& x, const Mat& y) { return !(x == y); }

  VecR operator*(const VecR& v) const {
    if (v.size() != cols_) throw InvariantError("Mat*vec: size mismatch");
    VecR r(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      Rat s = 0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  Mat operator*(const Mat& o) const {
    if (o.rows_ != cols_) throw InvariantError("Mat*Mat: size mismatch");
    Mat r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const Rat& x = (*this)(i, k);
        if (x == 0) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += x * o(k, j);
      }
    return r;
  }

  // this -= s * u v^T
  void sub_outer(const Rat& s, const VecR& u, const VecR& v) {
    if (u.size() != rows_ || v.size() != cols_) throw InvariantError("sub_outer: size mismatch");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (u[i] == 0) continue;
      Rat su = s * u[i];
      for (std::size_t j = 0; j < cols_; ++j)
        if (v[j] != 0) (*this)(i, j) -= su * v[j];
    }
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  std::size_t max_bits() const {
    std::size_t m = 1;
    for (const Rat& r : a_) {
      std::size_t b = bit_length(r);
      if (b > m) m = b;
    }
    return m;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<Rat> a_;
};

inline Rat dot(const VecR& a, const VecR& b) {
  if (a.size() != b.size()) throw InvariantError("dot: size mismatch");
  Rat s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Exact Gauss-Jordan inverse; nullopt on a singular input.
inline std::optional<Mat> inverse(const Mat& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw InvariantError("inverse: not square");
  Mat a = m;
  Mat inv = Mat::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a(piv, col) == 0) ++piv;
    if (piv == n) return std::nullopt;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    Rat p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a(i, col) == 0) continue;
      Rat f = a(i, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

inline std::size_t rank(Mat a) {
  std::size_t r = 0;
  const std::size_t rows = a.rows(), cols = a.cols();
  for (std::size_t col = 0; col < cols && r < rows; ++col) {
    std::size_t piv = r;
    while (piv < rows && a(piv, col) == 0) ++piv;
    if (piv == rows) continue;
    if (piv != r)
      for (std::size_t j = 0; j < cols; ++j) std::swap(a(piv, j), a(r, j));
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (a(i, col) == 0) continue;
      Rat f = a(i, col) / a(r, col);
      for (std::size_t j = col; j < cols; ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

// Solves a x = b exactly; nullopt when a is singular.
inline std::optional<VecR> solve(const Mat& a, const VecR& b) {
  auto inv = inverse(a);
  if (!inv) return std::nullopt;
  return (*inv) * b;
}

}  // namespace wardrop
