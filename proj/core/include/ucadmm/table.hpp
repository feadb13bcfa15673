#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ucadmm {

/// Dense row-major 2-D container; rows are time periods throughout the
/// solver, columns are network elements.
template <class V>
class Table2 {
 public:
  Table2() = default;
  Table2(std::size_t rows, std::size_t cols, const V& fill = V{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  V& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const V& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  V& at(std::size_t r, std::size_t c) {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("Table2 index");
    return (*this)(r, c);
  }
  const V& at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("Table2 index");
    return (*this)(r, c);
  }

  std::vector<V>& data() { return data_; }
  const std::vector<V>& data() const { return data_; }

  bool operator==(const Table2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<V> data_;
};

}  // namespace ucadmm
