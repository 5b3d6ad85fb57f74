#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mrrnn::neural {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Position of a tensor inside a ParameterSet.
struct ParamId {
  std::size_t index = static_cast<std::size_t>(-1);
  bool valid() const { return index != static_cast<std::size_t>(-1); }
  friend bool operator==(ParamId a, ParamId b) { return a.index == b.index; }
};

/// Named tensors with a fixed insertion order. Rank-1 tensors are stored as
/// single-column matrices; the rank is kept so that serialization can echo
/// the declared shape.
template <typename Scalar>
class ParameterSet {
 public:
  using scalar_type = Scalar;

  ParamId add(const std::string& name, Index rows, Index cols, int rank = 2) {
    if (index_.count(name) != 0) {
      throw std::invalid_argument("duplicate parameter name: " + name);
    }
    if (rows < 1 || cols < 1) {
      throw std::invalid_argument("empty parameter shape: " + name);
    }
    ParamId id{values_.size()};
    names_.push_back(name);
    ranks_.push_back(rank);
    values_.push_back(Matrix<Scalar>::Zero(rows, cols));
    index_.emplace(name, id.index);
    return id;
  }

  ParamId add_vector(const std::string& name, Index size) { return add(name, size, 1, 1); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  const std::string& name(std::size_t i) const { return names_.at(i); }
  int rank(std::size_t i) const { return ranks_.at(i); }

  Matrix<Scalar>& operator[](ParamId id) { return values_[id.index]; }
  const Matrix<Scalar>& operator[](ParamId id) const { return values_[id.index]; }
  Matrix<Scalar>& at(std::size_t i) { return values_.at(i); }
  const Matrix<Scalar>& at(std::size_t i) const { return values_.at(i); }

  ParamId find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? ParamId{} : ParamId{it->second};
  }

  ParamId require(const std::string& name) const {
    ParamId id = find(name);
    if (!id.valid()) throw std::out_of_range("unknown parameter: " + name);
    return id;
  }

  /// Same names and shapes, all entries zero.
  ParameterSet zeros_like() const {
    ParameterSet out = *this;
    for (auto& m : out.values_) m.setZero();
    return out;
  }

  template <typename Other>
  ParameterSet<Other> cast() const {
    ParameterSet<Other> out;
    for (std::size_t i = 0; i < size(); ++i) {
      ParamId id = out.add(names_[i], values_[i].rows(), values_[i].cols(), ranks_[i]);
      out[id] = values_[i].template cast<Other>();
    }
    return out;
  }

  bool congruent(const ParameterSet& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (names_[i] != other.names_[i] || values_[i].rows() != other.values_[i].rows() ||
          values_[i].cols() != other.values_[i].cols()) {
        return false;
      }
    }
    return true;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& m : values_) n += static_cast<std::size_t>(m.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& m : values_) {
      if (!m.allFinite()) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<int> ranks_;
  std::vector<Matrix<Scalar>> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Gradients share the layout of the parameters they belong to.
template <typename Scalar>
using GradientSet = ParameterSet<Scalar>;

template <typename Scalar>
void add_into(ParameterSet<Scalar>& acc, const ParameterSet<Scalar>& g) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc.at(i) += g.at(i);
}

template <typename Scalar>
Scalar squared_norm(const ParameterSet<Scalar>& g) {
  Scalar s = 0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.at(i).squaredNorm();
  return s;
}

/// Binary tensor payload: count, then per tensor (name length, name, rank,
/// dims, row-major little-endian binary64 values). Round trip is bit-exact.
void write_tensors(std::ostream& out, const ParameterSet<double>& params);
ParameterSet<double> read_tensors(std::istream& in);

}  // namespace mrrnn::neural
