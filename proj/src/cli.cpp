#include "qho/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iostream>

#include "qho/birkhoff.hpp"
#include "qho/dynamics.hpp"
#include "qho/error.hpp"
#include "qho/resonance.hpp"
#include "qho/spectral.hpp"

namespace qho::cli {

using io::json;
namespace fs = std::filesystem;

namespace {

template <class T>
T get(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

template <class T>
T require(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("config field '") + key + "' is required");
  return get<T>(cfg, key, T{});
}

std::size_t positive(const json& cfg, const char* key, long fallback) {
  const long v = get<long>(cfg, key, fallback);
  if (v <= 0) throw ConfigError(std::string("config field '") + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

double positive_real(const json& cfg, const char* key, double fallback) {
  const double v = get<double>(cfg, key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("config field '") + key + "' must be positive");
  return v;
}

// Potential from: "coeffs" | "potential_file" | "weight" + "seed", then optional "h1_norm" or "budget" rescaling.
potential::Potential potential_from(const json& cfg) {
  potential::Potential p;
  if (cfg.contains("coeffs")) {
    p = potential::from_coeffs(get<std::vector<double>>(cfg, "coeffs", {}));
  } else if (cfg.contains("potential_file")) {
    const json f = io::read_json(get<std::string>(cfg, "potential_file", ""));
    p = potential::from_coeffs(require<std::vector<double>>(f, "coeffs"));
  } else {
    const json w = cfg.value("weight", json::object());
    const std::string kind = get<std::string>(w, "kind", "power");
    const auto k_max = positive(w, "k_max", 64);
    if (kind == "zero") return potential::zero_potential(k_max);
    if (kind != "power") throw ConfigError("unknown weight kind '" + kind + "'");
    const auto weight = potential::power_weight(get<double>(w, "exponent", 3.0), k_max);
    p = potential::sample_potential(weight, get<std::uint64_t>(cfg, "seed", 0));
  }
  if (cfg.contains("h1_norm")) {
    const double target = get<double>(cfg, "h1_norm", 0.0);
    if (!(target >= 0.0)) throw ConfigError("h1_norm must be non-negative");
    const double n = potential::sobolev_norm(p, 1.0);
    if (n == 0.0) throw DegenerateInputError("cannot rescale the zero potential");
    p = potential::scaled(p, target / n);
  } else if (cfg.contains("budget")) {
    const json& b = cfg.at("budget");
    p = potential::rescale_to_budget(p, static_cast<int>(positive(b, "r", 1)), positive(b, "N", 1),
                                     positive_real(b, "gamma", 1.0));
  }
  return p;
}

json potential_json(const potential::Potential& p) {
  return {{"seed", p.seed}, {"weight", p.weight_label}, {"weight_params", p.weight_params},
          {"h1_norm", potential::sobolev_norm(p, 1.0)}, {"coeffs", p.coeffs}};
}

struct SpectrumRun {
  hermite::HermiteBasis basis;
  spectral::Spectrum s;
};

SpectrumRun spectrum_from(const json& cfg, const potential::Potential& p) {
  const auto D = positive(cfg, "D", 64);
  const auto trust = static_cast<std::size_t>(get<long>(cfg, "D_trust", 0));
  auto basis = spectral::basis_for(D, p.coeffs.size());
  auto s = spectral::compute_spectrum(basis, p, D, trust);
  return {std::move(basis), std::move(s)};
}

json fit_json(const PowerFit& f) { return {{"C", f.C}, {"slope", f.slope}, {"points", f.used}}; }

json tuple_json(const resonance::Tuple& t) { return {{"sigma", t.sigma}, {"j", t.j}}; }

std::string list(const std::vector<std::size_t>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

}  // namespace

int cmd_spectrum(const json& cfg, const Context& ctx) {
  const auto p = potential_from(cfg);
  const auto run = spectrum_from(cfg, p);
  const auto diag = spectral::eigen_diagnostics(run.s, run.basis);
  io::CsvWriter csv(ctx.out / "spectrum.csv", {"j", "lambda", "gap", "l2_dist", "l4_norm"});
  for (const auto& r : diag.rows) csv.row({static_cast<double>(r.j), r.lambda, r.gap, r.l2_dist, r.l4_norm});
  csv.close();
  json j = {{"D", run.s.dim},
            {"D_trust", run.s.trusted()},
            {"potential", potential_json(p)},
            {"evals", run.s.evals},
            {"gap_fit", fit_json(diag.gap_fit)},
            {"l2_fit", fit_json(diag.l2_fit)},
            {"l4_fit", fit_json(diag.l4_fit)},
            {"l4_dyadic_means", diag.l4_dyadic_means},
            {"warnings", run.s.warnings}};
  if (get<bool>(cfg, "check_convergence", false))
    j["galerkin_convergence"] = spectral::galerkin_convergence(p, run.s.dim, run.s.trusted());
  io::write_json(ctx.out / "spectrum.json", j);
  std::cout << "spectrum: " << run.s.trusted() << " eigenvalues, Lambda_1 = " << io::format_double(run.s.evals[0]) << '\n';
  return kOk;
}

int cmd_sample_potential(const json& cfg, const Context& ctx) {
  const auto p = potential_from(cfg);
  io::write_json(ctx.out / "potential.json", potential_json(p));
  io::CsvWriter csv(ctx.out / "potential.csv", {"k", "v"});
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) csv.row({static_cast<double>(k + 1), p.coeffs[k]});
  csv.close();
  std::cout << "potential: " << p.coeffs.size() << " coefficients, H^1 norm " << io::format_double(potential::sobolev_norm(p, 1.0)) << '\n';
  return kOk;
}

int cmd_resonance(const json& cfg, const Context& ctx) {
  const auto p = potential_from(cfg);
  const auto run = spectrum_from(cfg, p);
  const int r = static_cast<int>(positive(cfg, "r", 3));
  const auto N = positive(cfg, "N", 2);
  const auto j_cap = positive(cfg, "j_cap", 40);
  if (j_cap > run.s.trusted()) throw ConfigError("j_cap exceeds the trusted eigenvalues; raise D");
  const auto c = resonance::certify(run.s.evals, r, N, j_cap);
  json j = {{"r", c.r},
            {"N", c.N},
            {"j_cap", j_cap},
            {"j_max_scanned", c.j_max_scanned},
            {"beta", c.beta},
            {"resonant", c.resonant},
            {"count", c.count},
            {"argmin", tuple_json(c.argmin)},
            {"scaled_margin", c.scaled_margin},
            {"scaled_argmin", tuple_json(c.scaled_argmin)},
            {"potential", potential_json(p)}};
  if (c.resonant) j["witness"] = {{"sigma", c.argmin.sigma}, {"j", c.argmin.j}, {"omega", resonance::omega(run.s.evals, c.argmin)}};
  io::write_json(ctx.out / "certificate.json", j);
  std::cout << "certificate: beta = " << io::format_double(c.beta) << (c.resonant ? " (resonant)" : "") << '\n';
  return c.resonant ? kResonant : kOk;
}

int cmd_normal_form(const json& cfg, const Context& ctx) {
  const int p = static_cast<int>(positive(cfg, "p", 1));
  const int r = static_cast<int>(positive(cfg, "r", 1));
  const auto N = positive(cfg, "N", 1);

  std::vector<double> w;
  std::optional<hampoly::HamPoly> P;
  if (cfg.contains("frequencies")) {
    w = get<std::vector<double>>(cfg, "frequencies", {});
    if (w.empty()) throw ConfigError("frequencies must be non-empty");
    if (!cfg.contains("P")) throw ConfigError("explicit frequencies need an explicit P");
    P = io::hampoly_from_json(cfg.at("P"));
  } else {
    const auto M = positive(cfg, "M", 8);
    const auto pot = potential_from(cfg);
    const auto run = spectrum_from(cfg, pot);
    if (M > run.s.trusted()) throw ConfigError("M exceeds the trusted eigenvalues; raise D");
    w.assign(run.s.evals.begin(), run.s.evals.begin() + M);
    if (cfg.contains("P")) {
      P = io::hampoly_from_json(cfg.at("P"));
    } else {
      const int sign = get<int>(cfg, "sign", 1);
      P = dynamics::assemble_nonlinearity(run.s, run.basis, p, sign, M, true).tensor;
    }
  }
  birkhoff::Options opt;
  opt.beta_floor = get<double>(cfg, "beta_floor", 0.0);
  opt.track_dropped = get<bool>(cfg, "track_dropped", true);
  const auto nf = birkhoff::normal_form(w, *P, p, r, N, opt);

  json chis = json::array();
  for (const auto& c : nf.chis) chis.push_back(io::to_json(c));
  json qs = json::object();
  for (const auto& [n, q] : nf.Qs) qs[std::to_string(n)] = io::to_json(q);
  io::write_json(ctx.out / "normal_form.json", {{"p", p}, {"r", r}, {"N", N}, {"M", nf.M}, {"beta_floor", nf.beta_floor},
                                                {"frequencies", w}, {"chis", chis}, {"Qs", qs}});
  io::CsvWriter csv(ctx.out / "normal_form_diagnostics.csv",
                    {"stage", "l_orbits", "min_omega_used", "l_norm", "chi_c_norm", "cohomological_residual", "dropped_mass"});
  for (const auto& d : nf.diagnostics)
    csv.row({static_cast<double>(d.r_star), static_cast<double>(d.l_orbits), d.min_omega, d.l_norm, d.chi_c_norm,
             d.cohomological_residual, d.dropped_mass});
  csv.close();

  if (cfg.contains("validate")) {
    const json& v = cfg.at("validate");
    const auto eps = get<std::vector<double>>(v, "eps_grid", {0.1, 0.07, 0.05, 0.035});
    for (double e : eps)
      if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps_grid entries must lie in (0, 1]");
    const auto n = positive(v, "samples", 4);
    const auto seed = get<std::uint64_t>(v, "seed", 0);
    std::vector<hampoly::State> samples;
    for (std::size_t i = 0; i < n; ++i) samples.push_back(birkhoff::unit_sample(nf.M, seed + i));
    const auto val = birkhoff::validate_normal_form(nf, hampoly::z2(w), *P, samples, eps);
    io::write_json(ctx.out / "validation.json", {{"eps", val.eps},
                                                 {"remainder", val.remainder},
                                                 {"identity", val.identity},
                                                 {"remainder_fit", fit_json(val.remainder_fit)},
                                                 {"identity_fit", fit_json(val.identity_fit)},
                                                 {"min_sample_slope", val.min_sample_slope},
                                                 {"target", val.target}});
    std::cout << "remainder slope " << io::format_double(val.remainder_fit.slope) << " (target " << val.target << ")\n";
  }
  std::cout << "normal form: " << nf.chis.size() << " stages, beta_floor " << io::format_double(nf.beta_floor) << '\n';
  return kOk;
}

int cmd_evolve(const json& cfg, const Context& ctx) {
  const int p = static_cast<int>(positive(cfg, "p", 1));
  const int sign = get<int>(cfg, "sign", 1);
  const auto M = positive(cfg, "M", 16);
  const auto N = positive(cfg, "N", 2);
  if (N > M) throw ConfigError("N must not exceed M");
  const auto eps = require<std::vector<double>>(cfg, "eps_grid");
  if (eps.empty()) throw ConfigError("eps_grid must be non-empty");
  for (double e : eps)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps_grid entries must lie in (0, 1]");
  dynamics::EvolveOptions opt;
  opt.dt = positive_real(cfg, "dt", 1e-3);
  opt.stride = positive(cfg, "snapshot_stride", 100);
  opt.n_report = N;
  const std::string path = get<std::string>(cfg, "path", "physical");
  if (path != "physical" && path != "tensor") throw ConfigError("path must be 'physical' or 'tensor'");
  opt.path = path == "tensor" ? dynamics::Path::tensor : dynamics::Path::physical;
  const double T = cfg.contains("T") ? positive_real(cfg, "T", 1.0) : 0.0;

  const auto pot = potential_from(cfg);
  const auto run = spectrum_from(cfg, pot);
  if (M > run.s.trusted()) throw ConfigError("M exceeds the trusted eigenvalues; raise D");
  dynamics::Nonlinearity nl;
  if (get<bool>(cfg, "linear", false)) {
    nl.M = M;
    nl.p = p;
    nl.tensor = hampoly::HamPoly(M, p + 1);
    nl.has_tensor = true;
  } else {
    nl = dynamics::assemble_nonlinearity(run.s, run.basis, p, sign, M, opt.path == dynamics::Path::tensor);
  }
  const auto dr = dynamics::drift_experiment(run.s.evals, nl, eps, get<std::uint64_t>(cfg, "data_seed", 1), N, opt, T,
                                             ctx.threads);

  std::vector<std::string> header{"t", "H", "mass"};
  for (std::size_t j = 1; j <= N; ++j) header.push_back("I_" + std::to_string(j));
  json per_eps = json::array();
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const auto& tr = dr.trajectories[e];
    const std::string name = "trajectory_" + std::to_string(e) + ".csv";
    io::CsvWriter csv(ctx.out / name, header);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      std::vector<double> row{tr.times[i], tr.H[i], tr.mass[i]};
      row.insert(row.end(), tr.actions[i].begin(), tr.actions[i].end());
      csv.row(row);
    }
    csv.close();
    per_eps.push_back({{"eps", eps[e]}, {"csv", name}, {"T", tr.times.back()}, {"steps", tr.steps},
                       {"mass_drift", tr.mass_drift()}, {"energy_drift", tr.energy_drift()}, {"max_drift", tr.max_drift}});
  }
  json actions = json::object();
  for (std::size_t j = 1; j <= N; ++j) {
    std::vector<double> d;
    for (const auto& row : dr.report.drift) d.push_back(row[j - 1]);
    actions[std::to_string(j)] = {{"max_drift", d}, {"fitted_slope", dr.report.fits[j - 1].slope}};
  }
  io::write_json(ctx.out / "drift.json", {{"p", p}, {"N", N}, {"M", M}, {"dt", opt.dt}, {"target", dr.report.target},
                                          {"eps", eps}, {"runs", per_eps}, {"actions", actions},
                                          {"max_fit", fit_json(dr.report.max_fit)}});
  std::cout << "evolve: " << eps.size() << " trajectories, drift slope " << io::format_double(dr.report.max_fit.slope) << '\n';
  return kOk;
}

int cmd_drift_report(const json& cfg, const Context& ctx) {
  const auto N = positive(cfg, "N", 2);
  const int p = static_cast<int>(positive(cfg, "p", 1));
  if (!cfg.contains("trajectories") || !cfg.at("trajectories").is_array() || cfg.at("trajectories").empty())
    throw ConfigError("trajectories must be a non-empty array of {eps, csv}");
  std::vector<double> eps;
  std::vector<dynamics::Trajectory> trajs;
  for (const auto& t : cfg.at("trajectories")) {
    eps.push_back(positive_real(t, "eps", 1.0));
    const auto csv = io::read_csv(require<std::string>(t, "csv"));
    if (csv.rows.empty()) throw ConfigError("empty trajectory csv");
    dynamics::Trajectory tr;
    tr.max_drift.assign(N, 0.0);
    for (std::size_t j = 1; j <= N; ++j) {
      const auto c = csv.column("I_" + std::to_string(j));
      for (const auto& row : csv.rows) tr.max_drift[j - 1] = std::max(tr.max_drift[j - 1], std::abs(row[c] - csv.rows[0][c]));
    }
    trajs.push_back(std::move(tr));
  }
  const auto rep = dynamics::action_drift_report(eps, trajs, N, p);
  json actions = json::object();
  for (std::size_t j = 1; j <= N; ++j) {
    std::vector<double> d;
    for (const auto& row : rep.drift) d.push_back(row[j - 1]);
    actions[std::to_string(j)] = {{"max_drift", d}, {"fitted_slope", rep.fits[j - 1].slope}};
  }
  io::write_json(ctx.out / "drift_report.json",
                 {{"eps", eps}, {"target", rep.target}, {"actions", actions}, {"max_fit", fit_json(rep.max_fit)}});
  std::cout << "drift report: slope " << io::format_double(rep.max_fit.slope) << '\n';
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Spectral, resonance, normal-form and NLS experiments for the perturbed harmonic oscillator"};
  app.require_subcommand(1);
  std::string out;
  unsigned threads = 0;
  app.add_option("-o,--out", out, "output directory (default: $QHO_OUTPUT_DIR, then the working directory)");
  app.add_option("--threads", threads, "worker cap for parallel trajectories (0: all cores)");

  using Cmd = int (*)(const json&, const Context&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> table{
      {"spectrum", "eigenvalues and eigenvector diagnostics", cmd_spectrum},
      {"sample-potential", "draw a random potential", cmd_sample_potential},
      {"resonance-scan", "non-resonance certificate", cmd_resonance},
      {"normal-form", "Birkhoff normal form and remainder validation", cmd_normal_form},
      {"evolve", "truncated NLS trajectories and action drift", cmd_evolve},
      {"drift-report", "action drift from trajectory CSVs", cmd_drift_report}};
  std::vector<std::string> configs(table.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto* s = app.add_subcommand(std::get<0>(table[i]), std::get<1>(table[i]));
    s->add_option("config", configs[i], "JSON config file")->required();
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const json cfg = io::read_json(configs[i]);
      if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
      Context ctx;
      ctx.out = io::output_dir(out.empty() ? get<std::string>(cfg, "output_dir", "") : out);
      ctx.threads = threads ? threads : get<unsigned>(cfg, "threads", 0);
      return std::get<2>(table[i])(cfg, ctx);
    }
  } catch (const MultiplicityError& e) {
    std::cerr << "multiplicity: " << e.what() << '\n';
    return kMultiplicity;
  } catch (const SmallDivisorError& e) {
    std::cerr << "small divisor: j = " << list(e.j) << ", l = " << list(e.l) << ", Omega = " << io::format_double(e.omega)
              << " (" << e.what() << ")\n";
    return kSmallDivisor;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const DegenerateInputError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const IndexError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const json::exception& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace qho::cli
