#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bogo/experiments.hpp"
#include "json.hpp"

namespace bogo {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }
  std::size_t size() const { return rows_.size(); }
  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot write '" + path.string() + "'");
    auto line = [&](const std::vector<std::string>& c) {
      for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(int v) { return std::to_string(v); }

json cplx_list(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
  return a;
}

json hartree_json(const HartreeSolution& h) {
  return {{"u0", cplx_list(h.u0)},
          {"e_H", h.e_H},
          {"mu_H", h.mu_H},
          {"eta_H", h.eta_H},
          {"grad_norm", h.grad_norm},
          {"restart_agreement", h.restart_agreement},
          {"uniqueness_warning", h.uniqueness_warning},
          {"best_restart", h.best_restart},
          {"restart_energies", h.restart_energies}};
}

struct Run {
  StudyConfig cfg;
  fs::path out;
  bool quiet = false;
  json results = json::object();
  std::vector<std::pair<std::string, Csv>> csvs;
  std::string plot;

  void say(const std::string& s) const {
    if (!quiet) std::cout << s << '\n';
  }
  void add(std::string name, Csv csv) { csvs.emplace_back(std::move(name), std::move(csv)); }
};

void cmd_hartree(Run& r) {
  const HartreeSolution h = minimize_hartree(r.cfg.model, r.cfg.hartree);
  Csv c({"mode", "u0_re", "u0_im"});
  for (Eigen::Index i = 0; i < h.u0.size(); ++i)
    c.row({num(static_cast<int>(i)), fmt(h.u0[i].real()), fmt(h.u0[i].imag())});
  r.add("hartree.csv", std::move(c));
  Csv e({"restart", "energy"});
  for (std::size_t i = 0; i < h.restart_energies.size(); ++i)
    e.row({num(static_cast<int>(i)), fmt(h.restart_energies[i])});
  r.add("restarts.csv", std::move(e));
  r.results["hartree"] = hartree_json(h);
  r.plot = "set xlabel 'restart'\nset ylabel 'energy'\n"
           "plot 'restarts.csv' every ::1 using 1:2 with points title 'E(u) per restart'\n";
  r.say("e_H = " + fmt(h.e_H) + "  mu_H = " + fmt(h.mu_H) + "  eta_H = " + fmt(h.eta_H));
}

void cmd_bogoliubov(Run& r) {
  const Pipeline p = prepare(r.cfg);
  if (!p.spectrum)
    throw HessianGapError("Hessian gap violated: eta_H = " + fmt(p.hartree.eta_H), p.hartree.eta_H);
  const auto& s = *p.spectrum;
  Csv c({"mode", "xi"});
  for (Eigen::Index i = 0; i < s.xi.size(); ++i) c.row({num(static_cast<int>(i)), fmt(s.xi[i])});
  r.add("bogoliubov.csv", std::move(c));
  const double window = std::max(r.cfg.L - 1, 1) * s.xi[0] * (1 + 1e-9) + 1e-12;
  const auto lv = enumerate_spectrum(s, window, static_cast<std::size_t>(r.cfg.L) + 1000);
  Csv l({"L", "lambda_H"});
  for (int i = 0; i < r.cfg.L && i < static_cast<int>(lv.values.size()); ++i)
    l.row({num(i + 1), fmt(lv.values[i])});
  r.add("levels.csv", std::move(l));
  r.results["hartree"] = hartree_json(p.hartree);
  r.results["E0"] = s.E0;
  r.results["xi_min"] = s.xi[0];
  r.plot = "set xlabel 'L'\nset ylabel 'lambda_L'\n"
           "plot 'levels.csv' every ::1 using 1:2 with linespoints title 'quadratic levels'\n";
  r.say("E0 = " + fmt(s.E0) + "  xi_min = " + fmt(s.xi[0]));
}

void cmd_nbody(Run& r) {
  const HartreeSolution h = minimize_hartree(r.cfg.model, r.cfg.hartree);
  std::vector<std::string> head{"N"};
  for (int L = 1; L <= r.cfg.L; ++L) head.push_back("lambda_" + num(L));
  Csv c(head);
  const std::size_t k = static_cast<std::size_t>(r.cfg.L);
  for (int N : r.cfg.N_list) {
    const auto H = assemble_HN(r.cfg.model, N, r.cfg.kappa, r.cfg.basis_cap);
    if (H.dim() < k) throw ValidationError("nbody: sector dimension below L at N=" + num(N));
    const auto res = eig::lanczos_lowest(H, k, r.cfg.lanczos);
    std::vector<std::string> row{num(N)};
    for (std::size_t i = 0; i < k; ++i) row.push_back(fmt(res.values[static_cast<Eigen::Index>(i)]));
    c.row(row);
    r.say("N = " + num(N) + "  lambda_1 = " + fmt(res.values[0]));
  }
  r.add("nbody.csv", std::move(c));
  r.results["e_H"] = h.e_H;
  r.plot = "set xlabel 'N'\nset ylabel 'lambda_1(H_N)/N'\n"
           "plot 'nbody.csv' every ::1 using 1:($2/$1) with linespoints title 'energy per particle'\n";
}

void cmd_converge(Run& r) {
  const ConvergenceReport rep = run_convergence(r.cfg);
  std::vector<std::string> head{"N"};
  for (int L = 1; L <= r.cfg.L; ++L) head.push_back("lambda_N_" + num(L));
  for (int L = 1; L <= r.cfg.L; ++L) head.push_back("lambda_H_" + num(L));
  for (int L = 1; L <= r.cfg.L; ++L) head.push_back("abs_err_" + num(L));
  for (const char* h : {"condensation_deficit", "overlap", "residual_ratio", "gap"}) head.push_back(h);
  Csv c(head);
  for (const auto& row : rep.rows) {
    std::vector<std::string> cells{num(row.N)};
    for (double v : row.lambda_N) cells.push_back(fmt(v));
    for (double v : row.lambda_H) cells.push_back(fmt(v));
    for (double v : row.abs_err) cells.push_back(fmt(v));
    for (double v : {row.condensation_deficit, row.overlap, row.residual_ratio, row.gap})
      cells.push_back(fmt(v));
    c.row(cells);
    r.say("N = " + num(row.N) + "  abs_err_1 = " + fmt(row.abs_err[0]) +
          "  overlap = " + fmt(row.overlap));
  }
  r.add("convergence.csv", std::move(c));
  r.results["e_H"] = rep.e_H;
  r.results["mu_H"] = rep.mu_H;
  r.results["eta_H"] = rep.eta_H;
  r.results["xi_min"] = rep.xi_min;
  json fe = json::array();
  for (double v : rep.fitted_exponent) fe.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  r.results["fitted_exponent"] = fe;
  const int L = r.cfg.L;
  std::ostringstream gp;
  gp << "set logscale xy\nset xlabel 'N'\nset ylabel 'abs err'\nplot ";
  for (int i = 0; i < L; ++i)
    gp << (i ? ", " : "") << "'convergence.csv' every ::1 using 1:" << (2 + 2 * L + i)
       << " with linespoints title 'L=" << i + 1 << "'";
  gp << "\n";
  r.plot = gp.str();
}

void cmd_thermal(Run& r) {
  const auto rows = run_thermal(r.cfg);
  Csv c({"N", "F_N", "F_H", "gap", "trace_dist", "window"});
  for (const auto& t : rows) {
    c.row({num(t.N), fmt(t.F_N), fmt(t.F_H), fmt(t.gap), fmt(t.trace_dist), num(t.window)});
    r.say("N = " + num(t.N) + "  gap = " + fmt(t.gap) + "  trace_dist = " + fmt(t.trace_dist));
  }
  r.add("thermal.csv", std::move(c));
  r.plot = "set logscale xy\nset xlabel 'N'\n"
           "plot 'thermal.csv' every ::1 using 1:4 with linespoints title '|F_N - F_H|', "
           "'thermal.csv' every ::1 using 1:5 with linespoints title 'trace distance'\n";
}

void cmd_residual(Run& r) {
  const auto rows = run_residual(r.cfg);
  Csv c({"N", "M_loc", "r", "ratio"});
  for (const auto& t : rows) {
    c.row({num(t.N), num(t.M_loc), fmt(t.r), fmt(t.ratio)});
    r.say("N = " + num(t.N) + "  M_loc = " + num(t.M_loc) + "  r = " + fmt(t.r));
  }
  r.add("residual.csv", std::move(c));
  r.plot = "set logscale xy\nset xlabel 'N'\nset ylabel 'r'\n"
           "plot 'residual.csv' every ::1 using 1:3 with points title 'r(N, M_loc)'\n";
}

void cmd_ims(Run& r) {
  const auto rows = run_ims(r.cfg);
  Csv c({"M_loc", "cutoff", "max_defect", "bound", "C_f", "pass"});
  bool ok = true;
  for (const auto& t : rows) {
    c.row({num(t.M_loc), num(t.cutoff), fmt(t.max_defect), fmt(t.bound), fmt(t.C_f),
           t.pass ? "1" : "0"});
    ok = ok && t.pass;
    r.say("M_loc = " + num(t.M_loc) + "  defect = " + fmt(t.max_defect) + "  bound = " + fmt(t.bound));
  }
  r.add("ims.csv", std::move(c));
  r.results["pass"] = ok;
  r.plot = "set logscale xy\nset xlabel 'M_loc'\n"
           "plot 'ims.csv' every ::1 using 1:3 with linespoints title 'defect', "
           "'ims.csv' every ::1 using 1:4 with lines title 'bound'\n";
}

bool cmd_validate(Run& r) {
  const AssumptionReport a = validate_assumptions(r.cfg);
  Csv c({"N", "lambda_min_per_N", "pass"});
  for (const auto& k : a.condensation) c.row({num(k.N), fmt(k.lambda_min_per_N), k.pass ? "1" : "0"});
  r.add("validate.csv", std::move(c));
  r.results["restart_agreement"] = a.restart_agreement;
  r.results["uniqueness_warning"] = a.uniqueness_warning;
  r.results["eta_H"] = a.eta_H;
  r.results["h_min"] = a.h_min;
  r.results["K1_hs"] = a.K1_hs;
  r.results["K2_hs"] = a.K2_hs;
  r.results["grad_norm"] = a.grad_norm;
  r.results["passed"] = a.passed;
  r.plot = "set xlabel 'N'\n"
           "plot 'validate.csv' every ::1 using 1:2 with linespoints title 'lambda_min / N'\n";
  r.say("eta_H = " + fmt(a.eta_H) + "  h_min = " + fmt(a.h_min) +
        "  restart_agreement = " + fmt(a.restart_agreement) + (a.passed ? "  PASSED" : "  FAILED"));
  return a.passed;
}

void write_outputs(const Run& r, const std::string& command, double seconds, const std::string& status,
                   const std::string& message) {
  fs::create_directories(r.out);
  json m;
  m["command"] = command;
  m["status"] = status;
  if (!message.empty()) m["message"] = message;
  m["config"] = json::parse(config_to_json(r.cfg));
  m["versions"] = {{"bogo", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__},
                   {"cxx_standard", static_cast<long>(__cplusplus)}};
  m["timings"] = {{"wall_seconds", seconds}, {"threads", eig::threads()}};
  m["results"] = r.results;
  json files = json::array();
  for (const auto& [name, csv] : r.csvs) {
    csv.write(r.out / name);
    files.push_back(name);
  }
  m["csv"] = files;
  std::ofstream(r.out / "manifest.json", std::ios::binary) << m.dump(2) << '\n';
  std::ofstream gp(r.out / "plot.gp", std::ios::binary);
  gp << "# gnuplot script; run from this directory\n";
  if (!r.plot.empty()) gp << "set datafile separator ','\n" << r.plot;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Bogoliubov excitation spectra of mean-field bosonic systems"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool quiet = false;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for restarts, Lanczos and samples");
  app.add_option("--config", config_path, "JSON study configuration");
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--threads", threads, "Worker threads for assembly")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "Suppress progress output");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"hartree", "Minimize the Hartree functional"},
      {"bogoliubov", "Diagonalize the quadratic excitation Hamiltonian"},
      {"nbody", "Lowest eigenvalues of the N-body Hamiltonian"},
      {"converge", "Eigenvalue, eigenvector and condensation convergence"},
      {"thermal", "Free-energy and Gibbs-state convergence"},
      {"residual", "Truncated Fock-space residual scaling"},
      {"ims", "Localization inequality check"},
      {"validate", "Check the model assumptions"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (config_path.empty()) {
    std::cerr << "error: --config is required\n";
    return 2;
  }

  Run r;
  r.quiet = quiet;
  try {
    r.cfg = load_config(config_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  }
  if (*seed_opt) {
    r.cfg.seed = seed;
    r.cfg.hartree.seed = seed;
    r.cfg.lanczos.seed = seed;
  }
  if (!out_dir.empty()) r.cfg.output_dir = out_dir;
  r.out = r.cfg.output_dir;
  if (threads > 0) eig::set_threads(threads);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto fail = [&](const std::string& status, const std::string& msg, int code) {
    std::cerr << status << ": " << msg << '\n';
    try {
      write_outputs(r, command, elapsed(), status, msg);
    } catch (const std::exception&) {
    }
    return code;
  };
  try {
    bool ok = true;
    if (command == "hartree") cmd_hartree(r);
    else if (command == "bogoliubov") cmd_bogoliubov(r);
    else if (command == "nbody") cmd_nbody(r);
    else if (command == "converge") cmd_converge(r);
    else if (command == "thermal") cmd_thermal(r);
    else if (command == "residual") cmd_residual(r);
    else if (command == "ims") ok = (cmd_ims(r), r.results["pass"].get<bool>());
    else ok = cmd_validate(r);
    write_outputs(r, command, elapsed(), ok ? "ok" : "failed", "");
    return ok ? 0 : 1;
  } catch (const HessianGapError& e) {
    r.results["eta_H"] = e.eta();
    return fail("validation failure", e.what(), 1);
  } catch (const ValidationError& e) {
    return fail("validation failure", e.what(), 1);
  } catch (const ResourceError& e) {
    return fail("resource cap", e.what(), 3);
  } catch (const ParseError& e) {
    return fail("parse error", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("error", e.what(), 1);
  }
}

}  // namespace bogo
