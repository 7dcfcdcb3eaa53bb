// pcmpc: command-line front end.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcmpc/chance/tightening.hpp"
#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"
#include "pcmpc/polychaos/expansion.hpp"
#include "pcmpc/snmpc/closed_loop.hpp"
#include "pcmpc/wobench/monte_carlo.hpp"
#include "pcmpc/wobench/nmpc.hpp"
#include "pcmpc/wobench/williams_otto.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pcmpc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  try {
    json j = json::parse(is);
    if (!j.is_object()) throw ConfigError("config '" + path + "' must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& what) {
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(what + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  try {
    return j.value(key, fallback);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  os << j.dump(2) << '\n';
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

wobench::WoConfig model_config(const json& cfg) {
  if (!cfg.contains("model")) return {};
  reject_unknown(cfg["model"], [] {
    std::vector<std::string> k;
    for (const auto& [key, _] : wobench::WoConfig{}.to_json().items()) k.push_back(key);
    return k;
  }(), "model");
  return wobench::WoConfig::from_json(cfg["model"]);
}

struct Inputs {
  double u1 = 0.002;
  double u2 = 318.0;
  double t_f = 4000.0;
  int points = 126;
};

Inputs inputs_of(const json& cfg) {
  Inputs in;
  if (cfg.contains("inputs")) {
    const auto u = get(cfg, "inputs", std::vector<double>{});
    if (u.size() != 2) throw ConfigError("inputs must be [u1, u2]");
    in.u1 = u[0];
    in.u2 = u[1];
  }
  in.t_f = get(cfg, "t_f", in.t_f);
  in.points = get(cfg, "points", in.points);
  if (!(in.t_f > 0.0) || in.points < 2) throw ConfigError("t_f must be positive and points >= 2");
  return in;
}

struct Expanded {
  wobench::WoModel model;
  std::shared_ptr<galerkin::ProjectionTensor> tensor;
  std::shared_ptr<galerkin::ExpandedOde> ode;
};

Expanded expand_model(const wobench::WoConfig& cfg) {
  Expanded e;
  e.model = wobench::build_model(cfg);
  e.tensor = std::make_shared<galerkin::ProjectionTensor>(e.model.basis, e.model.lifted->max_state_degree());
  e.ode = std::make_shared<galerkin::ExpandedOde>(galerkin::project_dynamics(*e.model.lifted, e.model.basis, *e.tensor));
  return e;
}

Eigen::VectorXd initial_state(const wobench::WoConfig& cfg) {
  return Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), wobench::kPhysStates);
}

// ---------------------------------------------------------------- tighten

struct TightenArgs {
  std::string config;
  std::optional<double> beta, alpha;
  std::optional<int> samples, from, to;
  bool curve = false;
  std::string out;
};

int cmd_tighten(const TightenArgs& a) {
  const json cfg = load_config(a.config);
  reject_unknown(cfg, {"beta", "alpha", "n_samples", "n_range"}, "tighten config");
  const double beta = a.beta.value_or(get(cfg, "beta", 0.98));
  const double alpha = a.alpha.value_or(get(cfg, "alpha", 0.01));
  auto range = get(cfg, "n_range", std::vector<int>{});
  if (!range.empty() && range.size() != 2) throw ConfigError("n_range must be [from, to]");
  const bool curve = a.curve || (!range.empty() && !a.samples);
  if (curve) {
    const int from = a.from.value_or(range.empty() ? 200 : range[0]);
    const int to = a.to.value_or(range.empty() ? 300 : range[1]);
    const auto pts = chance::tightening_curve(beta, alpha, from, to);
    std::ofstream file;
    if (!a.out.empty()) {
      file.open(a.out);
      if (!file) throw ConfigError("cannot write '" + a.out + "'");
    }
    std::ostream& os = a.out.empty() ? std::cout : file;
    os << "n_samples,k,beta_cor,lower_bound\n" << std::setprecision(12);
    for (const auto& p : pts) os << p.n_samples << ',' << p.k << ',' << p.beta_cor << ',' << p.lower_bound_at_beta_cor << '\n';
    return 0;
  }
  const int n = a.samples.value_or(get(cfg, "n_samples", 5000));
  json j{{"beta", beta}, {"alpha", alpha}, {"n_samples", n}};
  try {
    const auto r = chance::tighten(beta, alpha, n);
    j["feasible"] = true;
    j["k"] = r.k;
    j["beta_cor"] = r.beta_cor;
    j["lower_bound"] = r.lower_bound_at_beta_cor;
    std::cout << j.dump(2) << '\n';
    return 0;
  } catch (const InfeasibleError& e) {
    j["feasible"] = false;
    j["message"] = e.what();
    std::cout << j.dump(2) << '\n';
    return kExitNumerical;
  }
}

// ---------------------------------------------------------------- expand

int cmd_expand(const std::string& config, std::optional<int> order, const std::string& out) {
  json cfg = load_config(config);
  reject_unknown(cfg, {"model", "order"}, "expand config");
  auto mc = model_config(cfg);
  mc.order = order.value_or(get(cfg, "order", mc.order));
  const auto t0 = std::chrono::steady_clock::now();
  const auto e = expand_model(mc);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json s{{"order", mc.order},
         {"n_xi", wobench::kNxi},
         {"terms_per_state", e.ode->n_terms()},
         {"states", e.ode->n_states()},
         {"equations", e.ode->dim()},
         {"physical_equations", wobench::kPhysStates * e.ode->n_terms()},
         {"kernels", e.ode->kernels().size()},
         {"instructions", e.ode->instruction_count()},
         {"quadrature_nodes", e.tensor->quadrature_nodes()},
         {"seconds", secs}};
  json nnz = json::object();
  for (int d = 1; d <= e.tensor->d_max(); ++d) nnz[std::to_string(d)] = e.tensor->table(d).nnz();
  s["tensor_nnz"] = nnz;
  if (!out.empty()) {
    json doc = galerkin::expanded_ode_to_json(*e.ode);
    doc["model"] = mc.to_json();
    write_json(out, doc);
  }
  std::cout << s.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& config, const std::string& out) {
  const json cfg = load_config(config);
  reject_unknown(cfg, {"model", "seeds", "n_draws", "inputs", "t_f", "points", "rel_tol"}, "simulate config");
  const auto mc = model_config(cfg);
  const auto in = inputs_of(cfg);
  const int n_draws = get(cfg, "n_draws", 5000);
  const json seeds = get(cfg, "seeds", json::object());
  reject_unknown(seeds, {"sample"}, "seeds");
  const std::uint64_t seed = get(seeds, "sample", std::uint64_t{0x5A3D1E});
  odeint::IntegratorConfig ic;
  ic.rel_tol = get(cfg, "rel_tol", 1e-8);
  ic.abs_tol = ic.rel_tol * 1e-2;

  const auto dir = prepare_dir(out);
  write_json(dir / "config.json", {{"model", mc.to_json()}, {"n_draws", n_draws}, {"seeds", {{"sample", seed}}},
                                   {"inputs", {in.u1, in.u2}}, {"t_f", in.t_f}, {"points", in.points},
                                   {"rel_tol", ic.rel_tol}});
  const auto e = expand_model(mc);
  const auto x0 = wobench::initial_coefficients(e.model, initial_state(mc), mc.ic_noise_at_t0 ? mc.ic_rel_sd : 0.0);
  const auto grid = wobench::export_grid(in.t_f, in.points);
  const auto sched = odeint::InputSchedule::constant(Eigen::Vector2d(in.u1, in.u2), 0.0, in.t_f);
  const auto tr = odeint::integrate(*e.ode, x0, sched, 0.0, in.t_f, grid, ic);
  std::optional<polychaos::SampleMatrix> samples;
  if (n_draws > 0)
    samples.emplace(n_draws, std::vector<polychaos::Family>(wobench::kNxi, polychaos::Family::Hermite), seed);
  const auto m = wobench::pce_moments(*e.ode, tr, grid, wobench::kPhysStates, samples ? &*samples : nullptr);
  wobench::write_moments_csv((dir / "pce_moments.csv").string(), m);
  std::vector<std::string> labels;
  for (int l = 0; l < e.ode->n_states(); ++l)
    for (int k = 0; k < e.ode->n_terms(); ++k) labels.push_back("x" + std::to_string(l + 1) + "_c" + std::to_string(k));
  tr.write_csv((dir / "coefficients.csv").string(), labels);
  std::cout << json{{"steps", tr.stats.steps}, {"rhs_evals", tr.stats.rhs_evals}, {"out", dir.string()}}.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- compare-mc

int cmd_compare_mc(const std::string& config, std::optional<int> draws, std::optional<std::uint64_t> seed,
                   const std::string& out) {
  const json cfg = load_config(config);
  reject_unknown(cfg, {"model", "n_draws", "seeds", "inputs", "t_f", "points", "rel_tol"}, "compare-mc config");
  const auto mc = model_config(cfg);
  const auto in = inputs_of(cfg);
  const int n_draws = draws.value_or(get(cfg, "n_draws", 5000));
  const json seeds = get(cfg, "seeds", json::object());
  reject_unknown(seeds, {"mc", "sample"}, "seeds");
  const std::uint64_t mc_seed = seed.value_or(get(seeds, "mc", std::uint64_t{0xC0FFEE}));
  const std::uint64_t sample_seed = get(seeds, "sample", std::uint64_t{0x5A3D1E});
  odeint::IntegratorConfig ic;
  ic.rel_tol = get(cfg, "rel_tol", 1e-8);
  ic.abs_tol = ic.rel_tol * 1e-2;

  const auto dir = prepare_dir(out);
  write_json(dir / "config.json", {{"model", mc.to_json()}, {"n_draws", n_draws},
                                   {"seeds", {{"mc", mc_seed}, {"sample", sample_seed}}},
                                   {"inputs", {in.u1, in.u2}}, {"t_f", in.t_f}, {"points", in.points},
                                   {"rel_tol", ic.rel_tol}});
  using clock = std::chrono::steady_clock;
  const auto grid = wobench::export_grid(in.t_f, in.points);
  const auto sched = odeint::InputSchedule::constant(Eigen::Vector2d(in.u1, in.u2), 0.0, in.t_f);

  auto t = clock::now();
  const auto e = expand_model(mc);
  const auto x0 = wobench::initial_coefficients(e.model, initial_state(mc), mc.ic_noise_at_t0 ? mc.ic_rel_sd : 0.0);
  const auto tr = odeint::integrate(*e.ode, x0, sched, 0.0, in.t_f, grid, ic);
  const double pce_build = std::chrono::duration<double>(clock::now() - t).count();
  t = clock::now();
  const polychaos::SampleMatrix samples(n_draws, std::vector<polychaos::Family>(wobench::kNxi, polychaos::Family::Hermite),
                                        sample_seed);
  const auto pce = wobench::pce_moments(*e.ode, tr, grid, wobench::kPhysStates, &samples);
  const double pce_sampling = std::chrono::duration<double>(clock::now() - t).count();
  t = clock::now();
  const auto ref = wobench::mc_reference(e.model, sched, grid, n_draws, mc_seed, ic);
  const double mc_time = std::chrono::duration<double>(clock::now() - t).count();

  wobench::MomentTrajectories err = pce;
  err.mean = (pce.mean - ref.mean).cwiseAbs();
  err.variance = (pce.variance - ref.variance).cwiseAbs();
  err.skewness = (pce.skewness - ref.skewness).cwiseAbs();
  err.kurtosis = (pce.kurtosis - ref.kurtosis).cwiseAbs();
  wobench::write_moments_csv((dir / "pce_moments.csv").string(), pce);
  wobench::write_moments_csv((dir / "mc_moments.csv").string(), ref);
  wobench::write_moments_csv((dir / "abs_error.csv").string(), err);
  const int last = static_cast<int>(grid.size()) - 1;
  json s{{"terms_per_state", e.ode->n_terms()},
         {"n_draws", n_draws},
         {"failed_draws", ref.n_failed},
         {"x6_tf_mean_error", err.mean(5, last)},
         {"x6_tf_variance_error", err.variance(5, last)},
         {"pce_build_seconds", pce_build},
         {"pce_sampling_seconds", pce_sampling},
         {"mc_seconds", mc_time},
         {"out", dir.string()}};
  write_json(dir / "summary.json", s);
  std::cout << s.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- snmpc

struct SnmpcArgs {
  std::string config;
  std::string out = "snmpc_out";
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  bool nominal = false;
};

int cmd_snmpc(const SnmpcArgs& a) {
  const json cfg = load_config(a.config);
  reject_unknown(cfg, {"closed_loop", "ocp"}, "snmpc config");
  snmpc::ClosedLoopConfig loop = wobench::default_closed_loop();
  if (cfg.contains("closed_loop")) {
    json merged = loop.to_json();
    merged.update(cfg["closed_loop"]);
    reject_unknown(cfg["closed_loop"], [&] {
      std::vector<std::string> k;
      for (const auto& [key, _] : loop.to_json().items()) k.push_back(key);
      return k;
    }(), "closed_loop");
    loop = snmpc::ClosedLoopConfig::from_json(merged);
  }
  wobench::WoNmpcConfig ocp = cfg.contains("ocp") ? wobench::WoNmpcConfig::from_json(cfg["ocp"]) : wobench::WoNmpcConfig{};
  if (a.runs) loop.runs = *a.runs;
  if (a.seed) {
    loop.plant_seed = *a.seed;
    loop.noise_seed = polychaos::derive_seed(*a.seed, 0x4E015E);
  }
  if (a.nominal) ocp.nominal = true;
  loop.validate();

  const auto dir = prepare_dir(a.out);
  write_json(dir / "config.json", {{"closed_loop", loop.to_json()}, {"ocp", ocp.to_json()}});
  const auto nmpc = std::make_shared<const wobench::WoNmpc>(ocp);
  const auto problem = wobench::make_problem(nmpc, loop.plant_seed);
  const auto runs = snmpc::closed_loop(loop, problem);

  for (const auto& r : runs) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03d", r.run);
    snmpc::write_run_csv((dir / (std::string(name) + ".csv")).string(), r, problem);
    std::ofstream hs(dir / (std::string(name) + "_horizons.csv"));
    hs << "t_k,n_pi,status,iterations,fallback,infeasible,p_hat,sampled_feasible,message\n" << std::setprecision(12);
    for (const auto& h : r.horizons)
      hs << h.t_k << ',' << h.n_pi << ',' << h.status << ',' << h.iterations << ',' << h.fallback << ',' << h.infeasible << ',' << h.p_hat
         << ',' << h.sampled_feasible << ",\"" << h.message << "\"\n";
  }
  snmpc::write_summary_csv((dir / "summary.csv").string(), runs);
  const auto s = snmpc::summarize(runs);
  json js{{"runs", s.runs},
          {"violations", s.violations},
          {"failures", s.failures},
          {"fallbacks", s.fallbacks},
          {"infeasible_horizons", s.infeasible_horizons},
          {"mean_profit", s.mean_profit},
          {"beta_cor", nmpc->tightening().beta_cor},
          {"nominal", ocp.nominal},
          {"out", dir.string()}};
  write_json(dir / "summary.json", js);
  std::cout << js.dump(2) << '\n';
  return s.failures == s.runs && s.runs > 0 ? kExitNumerical : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial-chaos stochastic NMPC toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.footer("Environment: PCMPC_THREADS overrides the worker thread count.\nExit codes: 0 ok, 2 config error, 3 numerical failure.");

  TightenArgs ta;
  auto* tighten = app.add_subcommand("tighten", "Corrected satisfaction level for a sample size");
  tighten->add_option("--config", ta.config, "JSON config {beta, alpha, n_samples | n_range}");
  tighten->add_option("--beta", ta.beta, "Target satisfaction probability");
  tighten->add_option("--alpha", ta.alpha, "Confidence parameter");
  tighten->add_option("--samples", ta.samples, "Sample size N_S");
  tighten->add_flag("--curve", ta.curve, "Minimal beta_cor for every N_S in [from, to] as CSV");
  tighten->add_option("--from", ta.from, "First sample size of the curve");
  tighten->add_option("--to", ta.to, "Last sample size of the curve");
  tighten->add_option("--out", ta.out, "Write the curve CSV here instead of stdout");

  std::string ex_config, ex_out;
  std::optional<int> ex_order;
  auto* expand = app.add_subcommand("expand", "Galerkin-project the Williams-Otto model and report its size");
  expand->add_option("--config", ex_config, "JSON config {model, order}");
  expand->add_option("--order", ex_order, "Total expansion order P");
  expand->add_option("--out", ex_out, "Write the expanded system as JSON");

  std::string sim_config, sim_out = "simulate_out";
  auto* simulate = app.add_subcommand("simulate", "Integrate the expanded model under constant inputs");
  simulate->add_option("--config", sim_config, "JSON config {model, seeds, n_draws, inputs, t_f, points, rel_tol}");
  simulate->add_option("--out", sim_out, "Output directory");

  std::string cmp_config, cmp_out = "compare_mc_out";
  std::optional<int> cmp_draws;
  std::optional<std::uint64_t> cmp_seed;
  auto* compare = app.add_subcommand("compare-mc", "Expansion moments against a Monte Carlo reference");
  compare->add_option("--config", cmp_config, "JSON config {model, n_draws, seeds, inputs, t_f, points, rel_tol}");
  compare->add_option("--draws", cmp_draws, "Monte Carlo draws");
  compare->add_option("--seed", cmp_seed, "Monte Carlo seed");
  compare->add_option("--out", cmp_out, "Output directory");

  SnmpcArgs sa;
  auto* nmpc = app.add_subcommand("snmpc", "Closed-loop shrinking-horizon runs on the Williams-Otto plant");
  nmpc->add_option("--config", sa.config, "JSON config {closed_loop, ocp}");
  nmpc->add_option("--runs", sa.runs, "Number of closed-loop runs");
  nmpc->add_flag("--nominal", sa.nominal, "Nominal NMPC: mean parameters, constraints on the means");
  nmpc->add_option("--seed", sa.seed, "Plant and noise seed");
  nmpc->add_option("--out", sa.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    if (*tighten) return cmd_tighten(ta);
    if (*expand) return cmd_expand(ex_config, ex_order, ex_out);
    if (*simulate) return cmd_simulate(sim_config, sim_out);
    if (*compare) return cmd_compare_mc(cmp_config, cmp_draws, cmp_seed, cmp_out);
    if (*nmpc) return cmd_snmpc(sa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
