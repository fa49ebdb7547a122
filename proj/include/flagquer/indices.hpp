#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagquer {

/// Strictly increasing index sequence 1 <= i_1 < ... < i_r <= n-1 selecting
/// the subspace dimensions of a partial flag in R^n. The conventions
/// i_0 = 0 and i_{r+1} = n are baked into extended().
class IndexSeq {
 public:
  IndexSeq(int ambient_dim, std::vector<int> indices)
      : n_(ambient_dim), indices_(std::move(indices)) {
    if (n_ < 2) throw std::invalid_argument("ambient dimension must be at least 2");
    if (indices_.empty()) throw std::invalid_argument("index sequence must be nonempty");
    for (std::size_t j = 0; j + 1 < indices_.size(); ++j)
      if (indices_[j] >= indices_[j + 1])
        throw std::invalid_argument("indices must be strictly increasing");
    if (indices_.front() < 1 || indices_.back() > n_ - 1)
      throw std::invalid_argument("indices must lie in [1, n-1]");
  }

  static IndexSeq complete(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n - 1));
    std::iota(idx.begin(), idx.end(), 1);
    return IndexSeq(n, std::move(idx));
  }

  int ambient() const noexcept { return n_; }
  int rank() const noexcept { return static_cast<int>(indices_.size()); }
  const std::vector<int>& indices() const noexcept { return indices_; }

  /// i_j for j in [0, rank()+1] with i_0 = 0 and i_{r+1} = n.
  int extended(int j) const {
    if (j <= 0) return 0;
    if (j > rank()) return n_;
    return indices_[static_cast<std::size_t>(j - 1)];
  }

  /// Exponent i_{j+1} - i_{j-1} attached to the j-th section volume (1-based j).
  int section_exponent(int j) const { return extended(j + 1) - extended(j - 1); }

  /// i_r * n, the root power of the flag quermassintegrals.
  long long root_power() const noexcept {
    return static_cast<long long>(indices_.back()) * n_;
  }

  bool is_complete() const noexcept { return rank() == n_ - 1; }

  bool operator==(const IndexSeq& other) const noexcept {
    return n_ == other.n_ && indices_ == other.indices_;
  }

 private:
  int n_;
  std::vector<int> indices_;
};

/// Left side of the integer identity sum_j i_j (i_{j+1} - i_{j-1}) = i_r n.
inline long long index_identity_lhs(const IndexSeq& seq) {
  long long total = 0;
  for (int j = 1; j <= seq.rank(); ++j)
    total += static_cast<long long>(seq.extended(j)) * seq.section_exponent(j);
  return total;
}

/// Permutation of {1, ..., n} driving the omega-flag quantities through the
/// increments delta(j) = w(j) - w(j+1) + 1.
class Permutation {
 public:
  explicit Permutation(std::vector<int> values) : values_(std::move(values)) {
    const int n = static_cast<int>(values_.size());
    if (n < 2) throw std::invalid_argument("permutation needs at least 2 entries");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int v : values_) {
      if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)])
        throw std::invalid_argument("permutation must be a bijection of {1..n}");
      seen[static_cast<std::size_t>(v - 1)] = 1;
    }
  }

  static Permutation reversal(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = n - j;
    return Permutation(std::move(v));
  }

  /// The permutation whose delta profile realizes an index sequence on the
  /// complete flag: delta(i_j) = i_{j+1} - i_{j-1} and delta = 0 elsewhere.
  static Permutation embed(const IndexSeq& seq) {
    const int n = seq.ambient();
    std::vector<int> w(static_cast<std::size_t>(n));
    w[0] = n - seq.extended(1) + 1;
    int next_marker = 1;
    for (int t = 1; t < n; ++t) {
      if (next_marker <= seq.rank() && t == seq.extended(next_marker)) {
        w[static_cast<std::size_t>(t)] =
            w[static_cast<std::size_t>(t - 1)] + 1 - seq.section_exponent(next_marker);
        ++next_marker;
      } else {
        w[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(t - 1)] + 1;
      }
    }
    return Permutation(std::move(w));
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  int at(int j) const { return values_.at(static_cast<std::size_t>(j - 1)); }
  const std::vector<int>& values() const noexcept { return values_; }

  /// delta(j) = w(j) - w(j+1) + 1 for j in [1, n-1].
  int delta(int j) const { return at(j) - at(j + 1) + 1; }

  bool fixes_top() const { return at(size()) == size(); }

  /// sum_j delta(j); equals n - w(n) + w(1) - 1.
  long long delta_sum() const {
    long long s = 0;
    for (int j = 1; j < size(); ++j) s += delta(j);
    return s;
  }

  /// sum_j j delta(j); equals n (n - w(n)) and fixes the homogeneity degree.
  long long weighted_delta_sum() const {
    long long s = 0;
    for (int j = 1; j < size(); ++j) s += static_cast<long long>(j) * delta(j);
    return s;
  }

  bool operator==(const Permutation& other) const noexcept {
    return values_ == other.values_;
  }

 private:
  std::vector<int> values_;
};

}  // namespace flagquer
