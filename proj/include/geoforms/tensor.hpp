#pragma once

// Dense multi-index tensor values at a point, row-major, with the usual
// index gymnastics: contraction, traces, raise/lower, (anti)symmetrization,
// and metric-trace-free projection. Valence (up/down slot kinds) travels
// with the value; contraction pairs one up with one down slot.

#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace geoforms {

class TensorError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Slot { Up, Down };

class TensorValue {
public:
  TensorValue(int dim, std::vector<Slot> valence);

  static TensorValue scalar(double v);
  static TensorValue delta(int dim);  // identity, valence (Up, Down)

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(valence_.size()); }
  const std::vector<Slot>& valence() const { return valence_; }

  double at(std::span<const int> idx) const { return data_[flatten(idx)]; }
  double at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }
  void set(std::span<const int> idx, double v) { data_[flatten(idx)] = v; }
  void set(std::initializer_list<int> idx, double v) {
    set(std::span<const int>(idx.begin(), idx.size()), v);
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double max_abs() const;

private:
  std::size_t flatten(std::span<const int> idx) const;
  int dim_;
  std::vector<Slot> valence_;
  std::vector<double> data_;
};

// Odometer over all multi-indices of the given rank; returns false when done.
bool next_index(std::vector<int>& idx, int dim);

TensorValue add(const TensorValue& a, const TensorValue& b);
TensorValue sub(const TensorValue& a, const TensorValue& b);
TensorValue scale(const TensorValue& a, double s);

// Sum over paired slots of a and b; each pair is (slot of a, slot of b) with
// opposite kinds. Result valence: unpaired slots of a then of b.
TensorValue contract(const TensorValue& a, const TensorValue& b,
                     std::span<const std::pair<int, int>> pairs);
TensorValue contract(const TensorValue& a, const TensorValue& b,
                     std::initializer_list<std::pair<int, int>> pairs);

// Internal trace of slots i and j (one up, one down).
TensorValue trace(const TensorValue& t, int i, int j);

TensorValue raise_slot(const TensorValue& t, int slot, const TensorValue& g_inv);
TensorValue lower_slot(const TensorValue& t, int slot, const TensorValue& g);

TensorValue symmetrize2(const TensorValue& t);      // rank-2
TensorValue antisymmetrize2(const TensorValue& t);  // rank-2

// Trace-free symmetric part of a rank-2 down-down tensor:
// t_((ab))o = 1/2 (t_ab + t_ba) - (1/d) g_ab g^cd t_cd.
TensorValue symmetrize_tf(const TensorValue& t, const TensorValue& g,
                          const TensorValue& g_inv);

double max_abs_diff(const TensorValue& a, const TensorValue& b);

}  // namespace geoforms
