#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bogo/types.hpp"

namespace bogo {

struct TensorEntry {
  int m, n, p, q;
  cplx value;
};

using Index4 = std::array<int, 4>;

// Sparse two-body tensor W_{mnpq} = <u_m (x) u_n, w u_p (x) u_q>.
//
// The symmetry group is generated by the exchange (m,n,p,q) -> (n,m,q,p)
// (same value) and the Hermitian swap (m,n,p,q) -> (p,q,m,n) (conjugate
// value). set() writes a whole orbit so that both hold exactly.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int M) : M_(M) {}

  int M() const { return M_; }

  cplx get(int m, int n, int p, int q) const;

  // Writes value at (m,n,p,q) and the symmetry-implied value at every other
  // member of its orbit. Throws ValidationError if the orbit is self-conjugate
  // and value is not real.
  void set(int m, int n, int p, int q, cplx value);

  // Adds value to the orbit (used by generators that accumulate terms).
  void add(int m, int n, int p, int q, cplx value);

  // Writes a single entry with no symmetry bookkeeping. Used to build
  // deliberately broken tensors.
  void set_raw(int m, int n, int p, int q, cplx value);

  // Replaces every pair (W_{mnpq}, W_{nmqp}) by its average.
  void symmetrize_exchange();

  // All stored entries, sorted lexicographically by (m,n,p,q).
  std::vector<TensorEntry> entries() const;
  // One entry per orbit, at its canonical representative.
  std::vector<TensorEntry> canonical_entries() const;

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  double max_abs() const;

  bool operator==(const Tensor4& o) const { return M_ == o.M_ && data_ == o.data_; }

  // Lexicographically smallest member of the orbit of idx, and whether
  // reaching it from idx involves a complex conjugation.
  static std::pair<Index4, bool> canonical(const Index4& idx);
  static bool self_conjugate(const Index4& idx);

 private:
  static std::uint64_t key(int m, int n, int p, int q);
  static Index4 unkey(std::uint64_t k);
  void check(int m, int n, int p, int q) const;

  int M_ = 0;
  std::map<std::uint64_t, cplx> data_;
};

struct ModelSystem {
  std::string name;
  int M = 0;
  Mat T;
  Tensor4 W;
  bool is_real = false;

  bool operator==(const ModelSystem& o) const {
    return name == o.name && M == o.M && is_real == o.is_real && T == o.T && W == o.W;
  }
};

struct ValidationReport {
  double hermiticity_residual_T = 0.0;
  double symmetry_residual_W = 0.0;
  double hermiticity_residual_W = 0.0;
  double realness_residual = 0.0;  // only nonzero when is_real is set
  bool passed = true;
};

ValidationReport validate_model(const ModelSystem& m, double tol = 1e-10);

// Throws ValidationError describing the failing residuals.
void require_valid(const ModelSystem& m);

// Translation-invariant gas on L plane-wave modes; mode p carries momentum p,
// mode 0 is zero momentum.
ModelSystem lattice_gas(int L, double J, const std::vector<double>& w_hat);

struct FormFactor {
  double g;
  Vec v;
};

// W_{mnpq} = sum_a g_a conj(v_a[m]) v_a[p] conj(v_a[n]) v_a[q].
ModelSystem separable_gas(int M, const std::vector<double>& t_diag,
                          const std::vector<FormFactor>& factors);

// Built-in systems used by examples and tests:
//   two_mode   separable, M = 2, nontrivial condensate rotation
//   lattice4   lattice_gas(4, 1, {0.5, 0.3, 0.2, 0.3})
//   free3      W = 0, T = diag(0, 1, 2)
//   contact3   only W_0000 = 0.2, T = diag(0, 1, 1.5)
//   saddle2    e_0 is a critical point with negative Hessian gap
ModelSystem builtin_model(const std::string& name);
std::vector<std::string> builtin_names();

void save_model(const ModelSystem& m, const std::string& path);
ModelSystem load_model(const std::string& path);

std::string model_to_json(const ModelSystem& m);
ModelSystem model_from_json(const std::string& text);

}  // namespace bogo
