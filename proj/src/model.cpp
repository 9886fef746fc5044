#include "bogo/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace bogo {

using json = nlohmann::json;

std::uint64_t Tensor4::key(int m, int n, int p, int q) {
  return (static_cast<std::uint64_t>(m) << 48) | (static_cast<std::uint64_t>(n) << 32) |
         (static_cast<std::uint64_t>(p) << 16) | static_cast<std::uint64_t>(q);
}

Index4 Tensor4::unkey(std::uint64_t k) {
  return {static_cast<int>((k >> 48) & 0xffff), static_cast<int>((k >> 32) & 0xffff),
          static_cast<int>((k >> 16) & 0xffff), static_cast<int>(k & 0xffff)};
}

void Tensor4::check(int m, int n, int p, int q) const {
  if (m < 0 || n < 0 || p < 0 || q < 0 || m >= M_ || n >= M_ || p >= M_ || q >= M_) {
    std::ostringstream os;
    os << "tensor index (" << m << "," << n << "," << p << "," << q << ") out of range for M="
       << M_;
    throw ValidationError(os.str());
  }
}

namespace {
// Orbit members: identity, exchange, Hermitian swap, both.
std::array<Index4, 4> orbit(const Index4& i) {
  return {{{i[0], i[1], i[2], i[3]},
           {i[1], i[0], i[3], i[2]},
           {i[2], i[3], i[0], i[1]},
           {i[3], i[2], i[1], i[0]}}};
}
}  // namespace

std::pair<Index4, bool> Tensor4::canonical(const Index4& idx) {
  const auto o = orbit(idx);
  int best = 0;
  for (int k = 1; k < 4; ++k)
    if (o[k] < o[best]) best = k;
  return {o[best], best >= 2};
}

bool Tensor4::self_conjugate(const Index4& idx) {
  const auto o = orbit(idx);
  return o[2] == o[0] || o[2] == o[1];
}

cplx Tensor4::get(int m, int n, int p, int q) const {
  const auto it = data_.find(key(m, n, p, q));
  return it == data_.end() ? cplx(0.0) : it->second;
}

void Tensor4::set(int m, int n, int p, int q, cplx value) {
  check(m, n, p, q);
  const Index4 idx{m, n, p, q};
  if (self_conjugate(idx)) {
    if (std::abs(value.imag()) > 1e-12 * (1.0 + std::abs(value))) {
      std::ostringstream os;
      os << "W(" << m << "," << n << "," << p << "," << q
         << ") is its own conjugate partner but has imaginary part " << value.imag();
      throw ValidationError(os.str());
    }
    value = cplx(value.real(), 0.0);
  }
  const auto o = orbit(idx);
  for (int k = 0; k < 4; ++k) {
    const auto& i = o[k];
    const std::uint64_t kk = key(i[0], i[1], i[2], i[3]);
    if (value == cplx(0.0))
      data_.erase(kk);
    else
      data_[kk] = k < 2 ? value : std::conj(value);
  }
}

void Tensor4::add(int m, int n, int p, int q, cplx value) {
  set(m, n, p, q, get(m, n, p, q) + value);
}

void Tensor4::set_raw(int m, int n, int p, int q, cplx value) {
  check(m, n, p, q);
  if (value == cplx(0.0))
    data_.erase(key(m, n, p, q));
  else
    data_[key(m, n, p, q)] = value;
}

void Tensor4::symmetrize_exchange() {
  std::map<std::uint64_t, cplx> out;
  for (const auto& [k, v] : data_) {
    const auto i = unkey(k);
    const cplx avg = 0.5 * (v + get(i[1], i[0], i[3], i[2]));
    if (avg != cplx(0.0)) out[k] = avg;
  }
  for (const auto& [k, v] : data_) {
    const auto i = unkey(k);
    const std::uint64_t kx = key(i[1], i[0], i[3], i[2]);
    if (!data_.count(kx)) {
      const cplx avg = 0.5 * v;
      if (avg != cplx(0.0)) out[kx] = avg;
    }
  }
  data_ = std::move(out);
}

std::vector<TensorEntry> Tensor4::entries() const {
  std::vector<TensorEntry> out;
  out.reserve(data_.size());
  for (const auto& [k, v] : data_) {
    const auto i = unkey(k);
    out.push_back({i[0], i[1], i[2], i[3], v});
  }
  return out;
}

std::vector<TensorEntry> Tensor4::canonical_entries() const {
  std::vector<TensorEntry> out;
  for (const auto& [k, v] : data_) {
    const auto i = unkey(k);
    if (canonical(i).first == i) out.push_back({i[0], i[1], i[2], i[3], v});
  }
  return out;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (const auto& [k, v] : data_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------

ValidationReport validate_model(const ModelSystem& m, double tol) {
  ValidationReport r;
  if (m.T.rows() != m.M || m.T.cols() != m.M) {
    r.passed = false;
    r.hermiticity_residual_T = std::numeric_limits<double>::infinity();
    return r;
  }
  r.hermiticity_residual_T = (m.T - m.T.adjoint()).cwiseAbs().maxCoeff();
  for (const auto& e : m.W.entries()) {
    r.symmetry_residual_W =
        std::max(r.symmetry_residual_W, std::abs(e.value - m.W.get(e.n, e.m, e.q, e.p)));
    r.hermiticity_residual_W = std::max(
        r.hermiticity_residual_W, std::abs(e.value - std::conj(m.W.get(e.p, e.q, e.m, e.n))));
    if (m.is_real) r.realness_residual = std::max(r.realness_residual, std::abs(e.value.imag()));
  }
  if (m.is_real) {
    r.realness_residual = std::max(r.realness_residual, m.T.imag().cwiseAbs().maxCoeff());
    r.realness_residual = std::max(r.realness_residual, (m.T - m.T.transpose()).cwiseAbs().maxCoeff());
  }
  r.passed = r.hermiticity_residual_T <= tol && r.symmetry_residual_W <= tol &&
             r.hermiticity_residual_W <= tol && r.realness_residual <= tol;
  return r;
}

void require_valid(const ModelSystem& m) {
  if (m.M < 2) throw ValidationError("model '" + m.name + "': M must be at least 2");
  if (m.W.M() != m.M) throw ValidationError("model '" + m.name + "': tensor size differs from M");
  const auto r = validate_model(m);
  if (!r.passed) {
    std::ostringstream os;
    os << "model '" << m.name << "' failed validation: T Hermiticity " << r.hermiticity_residual_T
       << ", W exchange " << r.symmetry_residual_W << ", W Hermiticity "
       << r.hermiticity_residual_W << ", realness " << r.realness_residual;
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------

ModelSystem lattice_gas(int L, double J, const std::vector<double>& w_hat) {
  if (L < 2) throw ValidationError("lattice_gas: L must be at least 2");
  if (static_cast<int>(w_hat.size()) != L)
    throw ValidationError("lattice_gas: w_hat must have L entries");
  if (J < 0) throw ValidationError("lattice_gas: hopping J must be nonnegative");
  for (int k = 0; k < L; ++k) {
    if (w_hat[k] < 0) throw ValidationError("lattice_gas: w_hat entries must be nonnegative");
    if (w_hat[k] != w_hat[(L - k) % L])
      throw ValidationError("lattice_gas: w_hat must satisfy w_hat[k] = w_hat[L-k]");
  }
  ModelSystem m;
  m.name = "lattice_gas";
  m.M = L;
  m.is_real = true;
  m.T = Mat::Zero(L, L);
  for (int p = 0; p < L; ++p)
    m.T(p, p) = 2.0 * J * (1.0 - std::cos(2.0 * std::numbers::pi * p / L));
  m.W = Tensor4(L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      for (int c = 0; c < L; ++c) {
        const int d = (((a + b - c) % L) + L) % L;
        const Index4 idx{a, b, c, d};
        if (Tensor4::canonical(idx).first != idx) continue;
        const double v = w_hat[((a - c) % L + L) % L] / L;
        if (v != 0.0) m.W.set(a, b, c, d, v);
      }
  return m;
}

ModelSystem separable_gas(int M, const std::vector<double>& t_diag,
                          const std::vector<FormFactor>& factors) {
  if (M < 2) throw ValidationError("separable_gas: M must be at least 2");
  if (static_cast<int>(t_diag.size()) != M)
    throw ValidationError("separable_gas: t_diag must have M entries");
  bool real = true;
  for (const auto& f : factors) {
    if (f.v.size() != M) throw ValidationError("separable_gas: form factor length differs from M");
    if (f.v.imag().cwiseAbs().maxCoeff() != 0.0) real = false;
  }
  ModelSystem m;
  m.name = "separable_gas";
  m.M = M;
  m.is_real = real;
  m.T = Mat::Zero(M, M);
  for (int i = 0; i < M; ++i) m.T(i, i) = t_diag[i];
  m.W = Tensor4(M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) {
          const Index4 idx{a, b, c, d};
          if (Tensor4::canonical(idx).first != idx) continue;
          cplx v(0.0);
          for (const auto& f : factors)
            v += f.g * std::conj(f.v[a]) * f.v[c] * std::conj(f.v[b]) * f.v[d];
          if (real) v = cplx(v.real(), 0.0);
          if (Tensor4::self_conjugate(idx)) v = cplx(v.real(), 0.0);
          if (v != cplx(0.0)) m.W.set(a, b, c, d, v);
        }
  return m;
}

ModelSystem builtin_model(const std::string& name) {
  ModelSystem m;
  if (name == "two_mode") {
    Vec v(2);
    v << std::sqrt(0.7), std::sqrt(0.3);
    m = separable_gas(2, {0.0, 1.0}, {{2.0, v}});
  } else if (name == "lattice4") {
    m = lattice_gas(4, 1.0, {0.5, 0.3, 0.2, 0.3});
  } else if (name == "free3") {
    m = separable_gas(3, {0.0, 1.0, 2.0}, {});
  } else if (name == "contact3") {
    Vec v = Vec::Zero(3);
    v[0] = 1.0;
    m = separable_gas(3, {0.0, 1.0, 1.5}, {{0.2, v}});
  } else if (name == "saddle2") {
    m.M = 2;
    m.is_real = true;
    m.T = Mat::Zero(2, 2);
    m.T(1, 1) = 0.1;
    m.W = Tensor4(2);
    m.W.set(0, 0, 1, 1, -1.0);
  } else {
    throw ValidationError("unknown built-in model '" + name + "'");
  }
  m.name = name;
  return m;
}

std::vector<std::string> builtin_names() {
  return {"two_mode", "lattice4", "free3", "contact3", "saddle2"};
}

// ---------------------------------------------------------------------------

std::string model_to_json(const ModelSystem& m) {
  json j;
  j["name"] = m.name;
  j["M"] = m.M;
  j["is_real"] = m.is_real;
  json T = json::array();
  for (int r = 0; r < m.M; ++r)
    for (int c = 0; c < m.M; ++c) T.push_back({m.T(r, c).real(), m.T(r, c).imag()});
  j["T"] = T;
  json W = json::array();
  for (const auto& e : m.W.canonical_entries())
    W.push_back({e.m, e.n, e.p, e.q, e.value.real(), e.value.imag()});
  j["W"] = W;
  return j.dump(1) + "\n";
}

namespace {

int line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void field_error(const std::string& text, const std::string& field,
                              const std::string& what) {
  const int line = line_of_key(text, field);
  throw ParseError("model file: field '" + field + "' " + what +
                       (line ? " (line " + std::to_string(line) + ")" : ""),
                   line, field);
}

cplx parse_complex(const json& v, const std::string& text, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  field_error(text, field, "expects a number or [re, im]");
}

}  // namespace

ModelSystem model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("model file: malformed document at line " + std::to_string(line) + ": " +
                         e.what(),
                     line, "");
  }
  if (!j.is_object()) throw ParseError("model file: top level must be an object", 1, "");
  for (const char* f : {"M", "T", "W"})
    if (!j.contains(f)) throw ParseError(std::string("model file: missing field '") + f + "'", 0, f);

  ModelSystem m;
  m.name = j.value("name", std::string("model"));
  if (!j["M"].is_number_integer()) field_error(text, "M", "must be an integer");
  m.M = j["M"].get<int>();
  if (m.M < 2) throw ValidationError("model file: M must be at least 2 (got " + std::to_string(m.M) + ")");
  if (j.contains("is_real")) {
    if (!j["is_real"].is_boolean()) field_error(text, "is_real", "must be a boolean");
    m.is_real = j["is_real"].get<bool>();
  }

  const json& T = j["T"];
  if (!T.is_array() || static_cast<int>(T.size()) != m.M * m.M)
    field_error(text, "T", "must be a row-major list of M*M entries");
  m.T = Mat::Zero(m.M, m.M);
  for (int r = 0; r < m.M; ++r)
    for (int c = 0; c < m.M; ++c) m.T(r, c) = parse_complex(T[r * m.M + c], text, "T");

  const json& W = j["W"];
  if (!W.is_array()) field_error(text, "W", "must be a list of [m,n,p,q,re,im]");
  m.W = Tensor4(m.M);
  for (std::size_t k = 0; k < W.size(); ++k) {
    const json& e = W[k];
    if (!e.is_array() || e.size() != 6) field_error(text, "W", "entries must be [m,n,p,q,re,im]");
    for (int i = 0; i < 4; ++i)
      if (!e[i].is_number_integer()) field_error(text, "W", "indices must be integers");
    for (int i = 4; i < 6; ++i)
      if (!e[i].is_number()) field_error(text, "W", "values must be numbers");
    const Index4 idx{e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<int>()};
    for (int i : idx)
      if (i < 0 || i >= m.M) throw ValidationError("model file: W index out of range");
    if (Tensor4::canonical(idx).first != idx) {
      std::ostringstream os;
      os << "model file: W entry (" << idx[0] << "," << idx[1] << "," << idx[2] << "," << idx[3]
         << ") is not the canonical representative of its symmetry orbit";
      throw ValidationError(os.str());
    }
    if (m.W.get(idx[0], idx[1], idx[2], idx[3]) != cplx(0.0))
      throw ValidationError("model file: duplicate W entry");
    const cplx v(e[4].get<double>(), e[5].get<double>());
    if (Tensor4::self_conjugate(idx) && v.imag() != 0.0) {
      std::ostringstream os;
      os << "model file: W entry (" << idx[0] << "," << idx[1] << "," << idx[2] << "," << idx[3]
         << ") must be real";
      throw ValidationError(os.str());
    }
    m.W.set(idx[0], idx[1], idx[2], idx[3], v);
  }
  require_valid(m);
  return m;
}

void save_model(const ModelSystem& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << model_to_json(m);
}

ModelSystem load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file '" + path + "'", 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace bogo
