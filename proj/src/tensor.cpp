#include "geoforms/tensor.hpp"

#include <cmath>
#include <cstddef>

namespace geoforms {

namespace {

std::size_t pow_size(int dim, int rank) {
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(dim);
  return n;
}

void check_same_shape(const TensorValue& a, const TensorValue& b) {
  if (a.dim() != b.dim() || a.valence() != b.valence())
    throw TensorError("tensor shape mismatch");
}

}  // namespace

TensorValue::TensorValue(int dim, std::vector<Slot> valence)
    : dim_(dim), valence_(std::move(valence)),
      data_(pow_size(dim, static_cast<int>(valence_.size())), 0.0) {
  if (dim < 1) throw TensorError("tensor dimension must be positive");
}

TensorValue TensorValue::scalar(double v) {
  TensorValue t(1, {});
  t.data_[0] = v;
  return t;
}

TensorValue TensorValue::delta(int dim) {
  TensorValue t(dim, {Slot::Up, Slot::Down});
  for (int i = 0; i < dim; ++i) t.set({i, i}, 1.0);
  return t;
}

std::size_t TensorValue::flatten(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != rank())
    throw TensorError("index rank mismatch");
  std::size_t flat = 0;
  for (int i : idx) {
    if (i < 0 || i >= dim_) throw TensorError("index out of range");
    flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return flat;
}

double TensorValue::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool next_index(std::vector<int>& idx, int dim) {
  for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
    if (++idx[i] < dim) return true;
    idx[i] = 0;
  }
  return false;
}

TensorValue add(const TensorValue& a, const TensorValue& b) {
  check_same_shape(a, b);
  TensorValue r = a;
  auto rd = r.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] += bd[i];
  return r;
}

TensorValue sub(const TensorValue& a, const TensorValue& b) {
  check_same_shape(a, b);
  TensorValue r = a;
  auto rd = r.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] -= bd[i];
  return r;
}

TensorValue scale(const TensorValue& a, double s) {
  TensorValue r = a;
  for (double& v : r.data()) v *= s;
  return r;
}

TensorValue contract(const TensorValue& a, const TensorValue& b,
                     std::span<const std::pair<int, int>> pairs) {
  if (a.dim() != b.dim()) throw TensorError("contract: dimension mismatch");
  const int dim = a.dim();

  std::vector<int> a_pair(a.rank(), -1), b_pair(b.rank(), -1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [i, j] = pairs[k];
    if (i < 0 || i >= a.rank() || j < 0 || j >= b.rank())
      throw TensorError("contract: slot out of range");
    if (a.valence()[i] == b.valence()[j])
      throw TensorError("contract: paired slots must be one up, one down");
    if (a_pair[i] != -1 || b_pair[j] != -1)
      throw TensorError("contract: slot paired twice");
    a_pair[i] = static_cast<int>(k);
    b_pair[j] = static_cast<int>(k);
  }

  std::vector<int> a_free, b_free;
  std::vector<Slot> out_valence;
  for (int i = 0; i < a.rank(); ++i)
    if (a_pair[i] == -1) { a_free.push_back(i); out_valence.push_back(a.valence()[i]); }
  for (int j = 0; j < b.rank(); ++j)
    if (b_pair[j] == -1) { b_free.push_back(j); out_valence.push_back(b.valence()[j]); }

  TensorValue r(dim, out_valence);
  const int out_rank = r.rank();
  const int n_pairs = static_cast<int>(pairs.size());

  std::vector<int> out_idx(out_rank, 0), sum_idx(n_pairs, 0);
  std::vector<int> ai(a.rank()), bi(b.rank());
  do {
    double acc = 0.0;
    std::fill(sum_idx.begin(), sum_idx.end(), 0);
    do {
      for (std::size_t k = 0; k < a_free.size(); ++k) ai[a_free[k]] = out_idx[k];
      for (std::size_t k = 0; k < b_free.size(); ++k)
        bi[b_free[k]] = out_idx[a_free.size() + k];
      for (int i = 0; i < a.rank(); ++i)
        if (a_pair[i] != -1) ai[i] = sum_idx[a_pair[i]];
      for (int j = 0; j < b.rank(); ++j)
        if (b_pair[j] != -1) bi[j] = sum_idx[b_pair[j]];
      acc += a.at(ai) * b.at(bi);
    } while (n_pairs > 0 && next_index(sum_idx, dim));
    r.set(out_idx, acc);
  } while (out_rank > 0 && next_index(out_idx, dim));
  return r;
}

TensorValue contract(const TensorValue& a, const TensorValue& b,
                     std::initializer_list<std::pair<int, int>> pairs) {
  return contract(a, b,
                  std::span<const std::pair<int, int>>(pairs.begin(), pairs.size()));
}

TensorValue trace(const TensorValue& t, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= t.rank() || j >= t.rank())
    throw TensorError("trace: bad slots");
  if (t.valence()[i] == t.valence()[j])
    throw TensorError("trace: paired slots must be one up, one down");
  if (i > j) std::swap(i, j);

  std::vector<Slot> out_valence;
  for (int k = 0; k < t.rank(); ++k)
    if (k != i && k != j) out_valence.push_back(t.valence()[k]);

  TensorValue r(t.dim(), out_valence);
  std::vector<int> out_idx(r.rank(), 0), ti(t.rank());
  do {
    double acc = 0.0;
    for (int s = 0; s < t.dim(); ++s) {
      int pos = 0;
      for (int k = 0; k < t.rank(); ++k)
        ti[k] = (k == i || k == j) ? s : out_idx[pos++];
      acc += t.at(ti);
    }
    r.set(out_idx, acc);
  } while (r.rank() > 0 && next_index(out_idx, t.dim()));
  return r;
}

namespace {

TensorValue metric_slot_op(const TensorValue& t, int slot, const TensorValue& m,
                           Slot require, Slot produce) {
  if (slot < 0 || slot >= t.rank()) throw TensorError("slot out of range");
  if (t.valence()[slot] != require)
    throw TensorError("raise/lower: slot already has the target kind");
  if (m.rank() != 2 || m.dim() != t.dim())
    throw TensorError("raise/lower: metric shape mismatch");

  std::vector<Slot> out_valence = t.valence();
  out_valence[slot] = produce;
  TensorValue r(t.dim(), out_valence);
  std::vector<int> idx(t.rank(), 0), ti(t.rank());
  do {
    double acc = 0.0;
    ti = idx;
    for (int s = 0; s < t.dim(); ++s) {
      ti[slot] = s;
      acc += m.at({idx[slot], s}) * t.at(ti);
    }
    r.set(idx, acc);
  } while (next_index(idx, t.dim()));
  return r;
}

}  // namespace

TensorValue raise_slot(const TensorValue& t, int slot, const TensorValue& g_inv) {
  return metric_slot_op(t, slot, g_inv, Slot::Down, Slot::Up);
}

TensorValue lower_slot(const TensorValue& t, int slot, const TensorValue& g) {
  return metric_slot_op(t, slot, g, Slot::Up, Slot::Down);
}

TensorValue symmetrize2(const TensorValue& t) {
  if (t.rank() != 2) throw TensorError("symmetrize2: rank-2 required");
  TensorValue r = t;
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j)
      r.set({i, j}, 0.5 * (t.at({i, j}) + t.at({j, i})));
  return r;
}

TensorValue antisymmetrize2(const TensorValue& t) {
  if (t.rank() != 2) throw TensorError("antisymmetrize2: rank-2 required");
  TensorValue r = t;
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j)
      r.set({i, j}, 0.5 * (t.at({i, j}) - t.at({j, i})));
  return r;
}

TensorValue symmetrize_tf(const TensorValue& t, const TensorValue& g,
                          const TensorValue& g_inv) {
  if (t.rank() != 2 || t.valence()[0] != Slot::Down || t.valence()[1] != Slot::Down)
    throw TensorError("symmetrize_tf: rank-2 down-down required");
  if (g.dim() != t.dim() || g_inv.dim() != t.dim())
    throw TensorError("symmetrize_tf: dimension mismatch");
  TensorValue r = symmetrize2(t);
  double tr = 0.0;
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) tr += g_inv.at({i, j}) * t.at({i, j});
  double c = tr / static_cast<double>(t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j)
      r.set({i, j}, r.at({i, j}) - c * g.at({i, j}));
  return r;
}

double max_abs_diff(const TensorValue& a, const TensorValue& b) {
  check_same_shape(a, b);
  double m = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i)
    m = std::max(m, std::abs(ad[i] - bd[i]));
  return m;
}

}  // namespace geoforms
