#include "bogo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace bogo {

using json = nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Configuration

void validate_config(const StudyConfig& cfg) {
  if (cfg.N_list.empty()) throw ValidationError("config: N_list is empty");
  for (std::size_t i = 0; i < cfg.N_list.size(); ++i) {
    if (cfg.N_list[i] < 2) throw ValidationError("config: every N must be at least 2");
    if (i && cfg.N_list[i] <= cfg.N_list[i - 1])
      throw ValidationError("config: N_list must be strictly ascending");
  }
  if (cfg.L < 1) throw ValidationError("config: L must be at least 1");
  if (cfg.cutoff < 2) throw ValidationError("config: cutoff must be at least 2");
  if (cfg.beta && !(*cfg.beta > 0)) throw ValidationError("config: beta must be positive");
  for (int m : cfg.M_loc_list)
    if (m < 1) throw ValidationError("config: M_loc values must be at least 1");
  if (!(cfg.eps0 > 0 && cfg.eps0 < 1)) throw ValidationError("config: eps0 must lie in (0, 1)");
  if (cfg.ims_samples < 1) throw ValidationError("config: ims_samples must be positive");
  require_valid(cfg.model);
}

namespace {

std::vector<int> int_list(const json& j, const char* field) {
  if (!j.is_array()) throw ParseError(std::string("config: '") + field + "' must be a list", 0, field);
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw ParseError(std::string("config: '") + field + "' must hold integers", 0, field);
    out.push_back(v.get<int>());
  }
  return out;
}

double number(const json& j, const char* field) {
  if (!j.is_number()) throw ParseError(std::string("config: '") + field + "' must be a number", 0, field);
  return j.get<double>();
}

int integer(const json& j, const char* field) {
  if (!j.is_number_integer())
    throw ParseError(std::string("config: '") + field + "' must be an integer", 0, field);
  return j.get<int>();
}

Vec complex_vector(const json& j, const char* field) {
  if (!j.is_array()) throw ParseError(std::string("config: '") + field + "' must be a list", 0, field);
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    if (e.is_number())
      v[static_cast<Eigen::Index>(i)] = e.get<double>();
    else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
      v[static_cast<Eigen::Index>(i)] = cplx(e[0].get<double>(), e[1].get<double>());
    else
      throw ParseError(std::string("config: '") + field + "' entries must be numbers or [re, im]",
                       0, field);
  }
  return v;
}

ModelSystem model_from_spec(const json& spec, const std::string& base_dir, std::string& source) {
  if (spec.is_string()) {
    std::filesystem::path p(spec.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    source = p.string();
    return load_model(p.string());
  }
  if (!spec.is_object() || spec.size() != 1)
    throw ParseError("config: 'model' must be a path or a one-key generator object", 0, "model");
  const auto& [kind, args] = *spec.items().begin();
  if (kind == "builtin") {
    if (!args.is_string()) throw ParseError("config: builtin model name must be a string", 0, "model");
    source = "builtin:" + args.get<std::string>();
    return builtin_model(args.get<std::string>());
  }
  if (kind == "lattice_gas") {
    source = "inline:lattice_gas";
    std::vector<double> w;
    for (const auto& v : args.at("w_hat")) w.push_back(number(v, "w_hat"));
    return lattice_gas(integer(args.at("L"), "L"), number(args.at("J"), "J"), w);
  }
  if (kind == "separable_gas") {
    source = "inline:separable_gas";
    std::vector<double> t;
    for (const auto& v : args.at("t_diag")) t.push_back(number(v, "t_diag"));
    std::vector<FormFactor> ff;
    if (args.contains("factors"))
      for (const auto& f : args.at("factors"))
        ff.push_back({number(f.at("g"), "g"), complex_vector(f.at("v"), "v")});
    return separable_gas(integer(args.at("M"), "M"), t, ff);
  }
  throw ParseError("config: unknown model generator '" + kind + "'", 0, "model");
}

}  // namespace

StudyConfig config_from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ParseError("config: malformed document at line " + std::to_string(line), line, "");
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object", 1, "");
  static const std::vector<std::string> known{
      "model",     "N_list",      "L",       "beta",  "kappa",      "cutoff",
      "M_loc_list", "seed",       "output_dir", "hartree", "lanczos", "eps0",
      "slack",     "validate_N",  "ims_samples", "basis_cap"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ParseError("config: unknown field '" + k + "'", 0, k);
  if (!j.contains("model")) throw ParseError("config: missing field 'model'", 0, "model");

  StudyConfig c;
  try {
    c.model = model_from_spec(j["model"], base_dir, c.model_source);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: bad model generator arguments: ") + e.what(), 0, "model");
  }
  if (j.contains("N_list")) c.N_list = int_list(j["N_list"], "N_list");
  if (j.contains("L")) c.L = integer(j["L"], "L");
  if (j.contains("beta") && !j["beta"].is_null()) c.beta = number(j["beta"], "beta");
  if (j.contains("kappa") && !j["kappa"].is_null()) c.kappa = number(j["kappa"], "kappa");
  if (j.contains("cutoff")) c.cutoff = integer(j["cutoff"], "cutoff");
  if (j.contains("M_loc_list")) c.M_loc_list = int_list(j["M_loc_list"], "M_loc_list");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("config: 'seed' must be a nonnegative integer", 0, "seed");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.hartree.seed = c.seed;
  c.lanczos.seed = c.seed;
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ParseError("config: 'output_dir' must be a string", 0, "output_dir");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("hartree")) {
    const json& h = j["hartree"];
    if (!h.is_object()) throw ParseError("config: 'hartree' must be an object", 0, "hartree");
    for (const auto& [k, v] : h.items()) {
      if (k == "restarts") c.hartree.restarts = integer(v, "restarts");
      else if (k == "tol") c.hartree.tol = number(v, "tol");
      else if (k == "max_iter") c.hartree.max_iter = integer(v, "max_iter");
      else if (k == "step0") c.hartree.step0 = number(v, "step0");
      else if (k == "seed") c.hartree.seed = v.get<std::uint64_t>();
      else throw ParseError("config: unknown field 'hartree." + k + "'", 0, k);
    }
  }
  if (j.contains("lanczos")) {
    const json& l = j["lanczos"];
    if (!l.is_object()) throw ParseError("config: 'lanczos' must be an object", 0, "lanczos");
    for (const auto& [k, v] : l.items()) {
      if (k == "tol") c.lanczos.tol = number(v, "tol");
      else if (k == "max_iter") c.lanczos.max_iter = integer(v, "max_iter");
      else if (k == "krylov_dim") c.lanczos.krylov_dim = static_cast<std::size_t>(integer(v, "krylov_dim"));
      else throw ParseError("config: unknown field 'lanczos." + k + "'", 0, k);
    }
  }
  if (j.contains("eps0")) c.eps0 = number(j["eps0"], "eps0");
  if (j.contains("slack")) c.slack = number(j["slack"], "slack");
  if (j.contains("validate_N")) c.validate_N = int_list(j["validate_N"], "validate_N");
  if (j.contains("ims_samples")) c.ims_samples = integer(j["ims_samples"], "ims_samples");
  if (j.contains("basis_cap")) c.basis_cap = static_cast<std::size_t>(integer(j["basis_cap"], "basis_cap"));
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string config_to_json(const StudyConfig& c) {
  json j;
  j["model_source"] = c.model_source;
  j["model"] = json::parse(model_to_json(c.model));
  j["N_list"] = c.N_list;
  j["L"] = c.L;
  j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
  j["kappa"] = c.kappa ? json(*c.kappa) : json(nullptr);
  j["cutoff"] = c.cutoff;
  j["M_loc_list"] = c.M_loc_list;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["hartree"] = {{"restarts", c.hartree.restarts}, {"tol", c.hartree.tol},
                  {"max_iter", c.hartree.max_iter}, {"step0", c.hartree.step0},
                  {"seed", c.hartree.seed}};
  j["lanczos"] = {{"tol", c.lanczos.tol}, {"max_iter", c.lanczos.max_iter},
                  {"krylov_dim", c.lanczos.krylov_dim}, {"seed", c.lanczos.seed}};
  j["eps0"] = c.eps0;
  j["slack"] = c.slack;
  j["validate_N"] = c.validate_N;
  j["ims_samples"] = c.ims_samples;
  j["basis_cap"] = c.basis_cap;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline prepare(const StudyConfig& cfg) {
  Pipeline p;
  p.hartree = minimize_hartree(cfg.model, cfg.hartree);
  p.qf = make_quadratic(p.hartree.h_plus + p.hartree.K1, p.hartree.K2);
  if (p.hartree.eta_H > 0) p.spectrum = diagonalize(p.qf);
  return p;
}

namespace {

void require_spectrum(const Pipeline& p) {
  if (!p.spectrum) {
    std::ostringstream os;
    os << "Hessian gap violated: eta_H = " << p.hartree.eta_H
       << " (restart agreement " << p.hartree.restart_agreement << ")";
    throw HessianGapError(os.str(), p.hartree.eta_H);
  }
}

double inf_norm(const eig::SparseHermitian& A) {
  std::vector<double> row(A.dim(), 0.0);
  for (const auto& t : A.triplets()) {
    row[t.row] += std::abs(t.value);
    if (t.row != t.col) row[t.col] += std::abs(t.value);
  }
  return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
}

// Indices in `big` of the states of `small` (both truncated, same mode count).
std::vector<std::size_t> embed(const OccupationBasis& small, const OccupationBasis& big) {
  std::vector<std::size_t> idx(small.dim());
  for (std::size_t i = 0; i < small.dim(); ++i)
    idx[i] = static_cast<std::size_t>(big.index_of(small.state(i)));
  return idx;
}

cplx unit_phase(cplx z) {
  const double a = std::abs(z);
  return a > 0 ? z / a : cplx(1.0);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

double max_abs_eig(const eig::SparseHermitian& D, const eig::LanczosOptions& opts) {
  if (D.dim() == 0) return 0.0;
  if (D.dim() <= 2000) {
    const auto e = eig::eigh_dense(D.to_dense());
    return std::max(std::abs(e.values[0]), std::abs(e.values[e.values.size() - 1]));
  }
  eig::SparseHermitian neg(D.dim());
  for (const auto& t : D.triplets()) neg.add(t.row, t.col, -t.value);
  neg.finalize();
  const double lo = eig::lanczos_lowest(D, 1, opts).values[0];
  const double hi = -eig::lanczos_lowest(neg, 1, opts).values[0];
  return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace

ConvergenceReport run_convergence(const StudyConfig& cfg) {
  validate_config(cfg);
  const Pipeline p = prepare(cfg);
  require_spectrum(p);
  const auto& hs = p.hartree;
  const auto& sp = *p.spectrum;
  const int d = p.qf.d;

  ConvergenceReport rep;
  rep.e_H = hs.e_H;
  rep.mu_H = hs.mu_H;
  rep.eta_H = hs.eta_H;
  rep.xi_min = sp.xi[0];

  const double shift = cfg.kappa ? *cfg.kappa * (hs.mu_H - hs.e_H) : 0.0;
  const double window = std::max(cfg.L - 1, 1) * sp.xi[0] * (1 + 1e-9) + 1e-12;
  const auto levels = enumerate_spectrum(sp, window, static_cast<std::size_t>(cfg.L) + 1000);
  std::vector<double> target(levels.values.begin(), levels.values.begin() + cfg.L);
  for (double& t : target) t += shift;

  // Reference ground vector of the truncated quadratic Hamiltonian.
  const OccupationBasis bcut = OccupationBasis::truncated(d, cfg.cutoff, cfg.basis_cap);
  const auto Hb = assemble_bogoliubov_fock(p.qf, cfg.cutoff, cfg.basis_cap);
  Vec phi = eig::lanczos_lowest(Hb, 1, cfg.lanczos).vectors.col(0);
  phi *= std::conj(unit_phase(phi[0]));

  const std::size_t k = static_cast<std::size_t>(std::max(cfg.L, 2));
  for (int N : cfg.N_list) {
    const OccupationBasis sector = OccupationBasis::sector(cfg.model.M, N, cfg.basis_cap);
    if (sector.dim() < k) throw ValidationError("run_convergence: sector too small for L levels");
    const auto H = assemble_HN(hs.rotated, N, cfg.kappa, cfg.basis_cap);
    const auto res = eig::lanczos_lowest(H, k, cfg.lanczos);

    ConvergenceRow row;
    row.N = N;
    for (int L = 0; L < cfg.L; ++L) {
      row.lambda_N.push_back(res.values[L] - N * hs.e_H);
      row.lambda_H.push_back(target[L]);
      row.abs_err.push_back(std::abs(row.lambda_N.back() - target[L]));
    }
    row.gap = res.values[1] - res.values[0];

    const Vec psi = res.vectors.col(0);
    row.condensation_deficit = 1.0 - condensation_fraction(psi, sector);

    const OccupationBasis exc = OccupationBasis::truncated(d, N, cfg.basis_cap);
    Vec x = apply_UN(psi, sector, exc);
    x *= std::conj(unit_phase(x[0]));
    const OccupationBasis common = OccupationBasis::truncated(d, std::min(N, cfg.cutoff));
    const auto in_x = embed(common, exc);
    const auto in_phi = embed(common, bcut);
    cplx ov(0.0);
    for (std::size_t i = 0; i < common.dim(); ++i)
      ov += std::conj(x[static_cast<Eigen::Index>(in_x[i])]) * phi[static_cast<Eigen::Index>(in_phi[i])];
    row.overlap = ov.real();

    double rmax = 0.0;
    for (double r : res.residuals) rmax = std::max(rmax, r);
    const double nrm = inf_norm(H);
    row.residual_ratio = nrm > 0 ? rmax / nrm : rmax;
    rep.rows.push_back(std::move(row));
  }

  for (int L = 0; L < cfg.L; ++L) {
    std::vector<double> lx, ly;
    for (const auto& r : rep.rows)
      if (r.abs_err[L] > 0) {
        lx.push_back(std::log(static_cast<double>(r.N)));
        ly.push_back(std::log(r.abs_err[L]));
      }
    rep.fitted_exponent.push_back(slope(lx, ly));
  }
  return rep;
}

std::vector<ResidualRow> run_residual(const StudyConfig& cfg) {
  validate_config(cfg);
  const Pipeline p = prepare(cfg);
  require_spectrum(p);
  const auto& hs = p.hartree;
  const int d = p.qf.d;
  std::vector<ResidualRow> out;
  for (int M_loc : cfg.M_loc_list) {
    if (M_loc < 2) continue;
    const auto Hloc = assemble_bogoliubov_fock(p.qf, M_loc, cfg.basis_cap);
    for (int N : cfg.N_list) {
      if (N < M_loc) continue;
      const auto T = transformed_HN(hs.rotated, N, hs.e_H, {}, cfg.basis_cap);
      const OccupationBasis exc = OccupationBasis::truncated(d, N, cfg.basis_cap);
      const auto Tr = restrict_truncated(T, exc, M_loc);
      eig::SparseHermitian D(Tr.dim());
      D.append(Tr.triplets());
      for (const auto& t : Hloc.triplets()) D.add(t.row, t.col, -t.value);
      D.finalize();
      ResidualRow r;
      r.N = N;
      r.M_loc = M_loc;
      r.r = max_abs_eig(D, cfg.lanczos);
      r.ratio = r.r / std::sqrt(static_cast<double>(M_loc) / N);
      out.push_back(r);
    }
  }
  return out;
}

std::vector<ImsRow> run_ims(const QuadraticForm& qf, const std::vector<int>& M_loc_list,
                            int samples, std::uint64_t seed) {
  std::vector<ImsRow> out;
  const double C_f = localization_constant();
  for (int M_loc : M_loc_list) {
    const int cutoff = std::max(2, 2 * M_loc);
    const auto Hb = assemble_bogoliubov_fock(qf, cutoff);
    const OccupationBasis basis = OccupationBasis::truncated(qf.d, cutoff);
    eig::LanczosOptions lo;
    lo.seed = seed;
    const double lmin = eig::lanczos_lowest(Hb, 1, lo).values[0];
    const Localization loc = localization_ops(basis, M_loc);
    const RVec np = number_plus(basis);

    // Sector-diagonal part of A = Hb - lmin.
    eig::SparseHermitian A0(Hb.dim());
    for (const auto& t : Hb.triplets())
      if (np[static_cast<Eigen::Index>(t.row)] == np[static_cast<Eigen::Index>(t.col)])
        A0.add(t.row, t.col, t.value);
    for (std::size_t i = 0; i < Hb.dim(); ++i) A0.add(i, i, -lmin);
    A0.finalize();

    auto expect = [&](const eig::SparseHermitian& A, const Vec& v, double shift) {
      return (v.dot(A * v)).real() - shift * v.squaredNorm();
    };
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(M_loc));
    std::normal_distribution<double> nd;
    ImsRow row;
    row.M_loc = M_loc;
    row.cutoff = cutoff;
    row.C_f = C_f;
    row.bound = C_f * 8.0 / (static_cast<double>(M_loc) * M_loc);
    const auto n = static_cast<Eigen::Index>(Hb.dim());
    for (int s = 0; s < samples; ++s) {
      Vec phi(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        phi[i] = cplx(re, im);
      }
      phi.normalize();
      const Vec fphi = loc.f.cast<cplx>().cwiseProduct(phi);
      const Vec gphi = loc.g.cast<cplx>().cwiseProduct(phi);
      const double a = expect(Hb, phi, lmin);
      const double fa = expect(Hb, fphi, lmin);
      const double ga = expect(Hb, gphi, lmin);
      const double a0 = expect(A0, phi, 0.0);
      row.max_defect = std::max(row.max_defect, std::abs(a - fa - ga) / a0);
    }
    row.pass = row.max_defect <= row.bound;
    out.push_back(row);
  }
  return out;
}

std::vector<ImsRow> run_ims(const StudyConfig& cfg) {
  validate_config(cfg);
  const Pipeline p = prepare(cfg);
  require_spectrum(p);
  return run_ims(p.qf, cfg.M_loc_list, cfg.ims_samples, cfg.seed);
}

std::vector<ThermalRow> run_thermal(const StudyConfig& cfg) {
  validate_config(cfg);
  if (!cfg.beta) throw ValidationError("run_thermal: beta is required");
  const double beta = *cfg.beta;
  const Pipeline p = prepare(cfg);
  require_spectrum(p);
  const auto& hs = p.hartree;
  const int d = p.qf.d;
  const int window = std::min(cfg.cutoff, cfg.N_list.front());

  const OccupationBasis bcut = OccupationBasis::truncated(d, cfg.cutoff, cfg.basis_cap);
  if (static_cast<Eigen::Index>(bcut.dim()) > kDenseGibbsCap)
    throw ResourceError("run_thermal: quadratic Hamiltonian at this cutoff exceeds the dense cap");
  const auto Hb = assemble_bogoliubov_fock(p.qf, cfg.cutoff, cfg.basis_cap);
  const Mat Gh = gibbs_objects(Hb.to_dense(), beta).gibbs;
  const OccupationBasis bw = OccupationBasis::truncated(d, window);
  const auto w_in_cut = embed(bw, bcut);
  const auto nw = static_cast<Eigen::Index>(bw.dim());
  Mat Gh_w(nw, nw);
  for (Eigen::Index j = 0; j < nw; ++j)
    for (Eigen::Index i = 0; i < nw; ++i)
      Gh_w(i, j) = Gh(static_cast<Eigen::Index>(w_in_cut[i]), static_cast<Eigen::Index>(w_in_cut[j]));
  const double F_H = free_energy_bogoliubov(*p.spectrum, beta);

  std::vector<ThermalRow> out;
  for (int N : cfg.N_list) {
    const OccupationBasis sector = OccupationBasis::sector(cfg.model.M, N, cfg.basis_cap);
    if (static_cast<Eigen::Index>(sector.dim()) > kDenseGibbsCap) {
      std::ostringstream os;
      os << "run_thermal: sector dimension " << sector.dim() << " at N=" << N
         << " exceeds the dense cap " << kDenseGibbsCap;
      throw ResourceError(os.str());
    }
    const auto H = assemble_HN(hs.rotated, N, cfg.kappa, cfg.basis_cap);
    const GibbsObjects g = gibbs_objects(H.to_dense(), beta);
    const OccupationBasis exc = OccupationBasis::truncated(d, N, cfg.basis_cap);
    const Mat G = relabel(g.gibbs, un_permutation(sector, exc));
    const auto w_in_exc = embed(bw, exc);
    Mat G_w(nw, nw);
    for (Eigen::Index j = 0; j < nw; ++j)
      for (Eigen::Index i = 0; i < nw; ++i)
        G_w(i, j) = G(static_cast<Eigen::Index>(w_in_exc[i]), static_cast<Eigen::Index>(w_in_exc[j]));
    ThermalRow r;
    r.N = N;
    r.F_N = g.free_energy - N * hs.e_H;
    r.F_H = F_H + (cfg.kappa ? *cfg.kappa * (hs.mu_H - hs.e_H) : 0.0);
    r.gap = std::abs(r.F_N - r.F_H);
    r.trace_dist = eig::trace_norm_diff(G_w, Gh_w);
    r.window = window;
    out.push_back(r);
  }
  return out;
}

AssumptionReport validate_assumptions(const StudyConfig& cfg) {
  require_valid(cfg.model);
  const HartreeSolution hs = minimize_hartree(cfg.model, cfg.hartree);
  AssumptionReport rep;
  rep.restart_agreement = hs.restart_agreement;
  rep.uniqueness_warning = hs.uniqueness_warning;
  rep.eta_H = hs.eta_H;
  rep.h_min = eig::lambda_min(hs.h_plus);
  rep.K1_hs = hs.K1.norm();
  rep.K2_hs = hs.K2.norm();
  rep.grad_norm = hs.grad_norm;
  bool ok = rep.eta_H > 0 && rep.h_min > 0 && !rep.uniqueness_warning;
  for (int N : cfg.validate_N) {
    if (N < 2) continue;
    const OccupationBasis sector = OccupationBasis::sector(cfg.model.M, N, cfg.basis_cap);
    const auto H = assemble_HN(hs.rotated, N, {}, cfg.basis_cap);
    const auto h = assemble_one_body(sector, hs.h_full);
    eig::SparseHermitian D(H.dim());
    D.append(H.triplets());
    for (const auto& t : h.triplets()) D.add(t.row, t.col, -(1.0 - cfg.eps0) * t.value);
    for (std::size_t i = 0; i < D.dim(); ++i) D.add(i, i, -N * hs.e_H);
    D.finalize();
    CondensationCheck c;
    c.N = N;
    c.lambda_min_per_N = eig::lanczos_lowest(D, 1, cfg.lanczos).values[0] / N;
    c.pass = c.lambda_min_per_N >= -cfg.slack;
    ok = ok && c.pass;
    rep.condensation.push_back(c);
  }
  rep.passed = ok;
  return rep;
}

}  // namespace bogo
