// abclab: simulation and verification laboratory for the randomized ABC flow
// on the 3-torus.  Subcommands: lyapunov | spectrum | mix | dynamo | verify |
// control | chain-stats.  Every run writes a JSON report (and CSV series
// where applicable) that embeds the full effective configuration; identical
// command lines produce byte-identical outputs at any thread count.

#include "abclab/control.hpp"
#include "abclab/dynamo.hpp"
#include "abclab/lyapunov.hpp"
#include "abclab/noise.hpp"
#include "abclab/spectral_field.hpp"
#include "abclab/stats.hpp"
#include "abclab/transport.hpp"
#include "abclab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using abclab::Vec3;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCertificate = 2;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

Vec3 parse_vec3(const std::string& text, const std::string& what) {
  Vec3 v;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',')
    throw CLI::ValidationError(what, "expected \"x,y,z\"");
  return v;
}

struct CommonOptions {
  std::uint64_t seed = 42;
  double u_max = abclab::pi<double>();
  std::string out;
  std::string format = "both";  // csv | json | both
  std::string time_units = "iteration";  // iteration | continuous
  std::uint64_t stream = 0;

  double rate_scale() const { return time_units == "continuous" ? 1.0 / 3.0 : 1.0; }
  bool want_csv() const { return format != "json"; }
  bool want_json() const { return format != "csv"; }

  json config_json(const std::string& experiment) const {
    json j;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["u_max"] = u_max;
    j["stream"] = stream;
    j["time_units"] = time_units;
    return j;
  }
};

// --config files are expanded into ordinary options before parsing: each
// `key = value` line becomes --key value, injected ahead of the command-line
// flags so that flags win under the take-last policy.  Unknown keys surface
// as unexpected-argument errors naming the key.
std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

std::vector<std::string> assemble_args(int argc, char** argv) {
  std::vector<std::string> raw(argv + 1, argv + argc);
  std::string config_path;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == "--config") {
      if (i + 1 >= raw.size()) throw std::invalid_argument("--config requires a file path");
      config_path = raw[++i];
    } else if (raw[i].rfind("--config=", 0) == 0) {
      config_path = raw[i].substr(9);
    } else {
      out.push_back(raw[i]);
    }
  }
  if (!config_path.empty()) {
    const auto sub = std::find_if(out.begin(), out.end(), [](const std::string& s) {
      return !s.empty() && s[0] != '-';
    });
    if (sub == out.end())
      throw std::invalid_argument("--config requires a subcommand");
    const std::vector<std::string> injected = config_tokens(config_path);
    out.insert(sub + 1, injected.begin(), injected.end());
  }
  return out;
}

void add_common(CLI::App* cmd, CommonOptions& common, const std::string& default_out) {
  common.out = default_out;
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--config", "line-oriented key = value configuration file "
                              "(expanded before parsing; flags take precedence)");
  cmd->add_option("--seed", common.seed, "RNG seed");
  cmd->add_option("--u-max", common.u_max, "amplitude bound U")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--stream", common.stream, "noise stream index")
      ->check(CLI::Range(std::uint64_t(0), std::uint64_t(0xFFFFFFFF)));
  cmd->add_option("--out", common.out, "output path prefix");
  cmd->add_option("--format", common.format, "output files to write")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--time-units", common.time_units,
                  "rate units: per iteration or per continuous time unit (3 per iteration)")
      ->check(CLI::IsMember({"iteration", "continuous"}));
}

json fit_json(const abclab::RateFit& fit, double scale) {
  json j;
  j["rate"] = fit.rate * scale;
  j["intercept"] = fit.intercept;
  j["r2"] = fit.r2;
  j["rate_stderr"] = fit.rate_stderr * scale;
  j["window"] = {fit.window_begin, fit.window_end};
  return j;
}

// ---------------------------------------------------------------- lyapunov

int run_lyapunov(const CommonOptions& common, int steps, int ensemble, const Vec3& x0,
                 const Vec3& v0) {
  const abclab::NoiseConfig cfg{common.u_max, common.seed};
  const abclab::TopLyapunovResult result = abclab::top_lyapunov(cfg, x0, v0, steps, ensemble);
  const double scale = common.rate_scale();
  const double lambda = result.estimate.lambda * scale;
  const double se = result.estimate.stderr_ * scale;

  if (common.want_csv()) {
    std::string csv = "trajectory,lambda\n";
    for (std::size_t i = 0; i < result.per_trajectory.size(); ++i)
      csv += std::to_string(i) + "," + fmt(result.per_trajectory[i] * scale) + "\n";
    write_text(common.out + ".csv", csv);
  }
  if (common.want_json()) {
    json j;
    j["experiment"] = "lyapunov";
    j["config"] = common.config_json("lyapunov");
    j["config"]["steps"] = steps;
    j["config"]["ensemble"] = ensemble;
    j["lambda"] = lambda;
    j["stderr"] = se;
    j["ci95"] = {lambda - 1.96 * se, lambda + 1.96 * se};
    write_json(common.out + ".json", j);
  }
  std::cout << "lambda1 = " << lambda << " +- " << se << " (" << common.time_units
            << " units), ensemble " << ensemble << " x " << steps << " steps\n";
  return kExitOk;
}

int run_spectrum(const CommonOptions& common, int steps, int ensemble, const Vec3& x0) {
  const abclab::NoiseConfig cfg{common.u_max, common.seed};
  const abclab::SpectrumEstimate est = abclab::lyapunov_spectrum(cfg, x0, steps, ensemble);
  const double scale = common.rate_scale();

  if (common.want_csv()) {
    std::string csv = "component,lambda,stderr\n";
    for (int d = 0; d < 3; ++d)
      csv += std::to_string(d + 1) + "," + fmt(est.lambda[d] * scale) + "," +
             fmt(est.stderr_[d] * scale) + "\n";
    write_text(common.out + ".csv", csv);
  }
  if (common.want_json()) {
    json j;
    j["experiment"] = "spectrum";
    j["config"] = common.config_json("spectrum");
    j["config"]["steps"] = steps;
    j["config"]["ensemble"] = ensemble;
    j["lambda"] = {est.lambda[0] * scale, est.lambda[1] * scale, est.lambda[2] * scale};
    j["stderr"] = {est.stderr_[0] * scale, est.stderr_[1] * scale, est.stderr_[2] * scale};
    j["sum"] = est.sum * scale;
    j["sum_stderr"] = est.sum_stderr * scale;
    write_json(common.out + ".json", j);
  }
  std::cout << "spectrum = (" << est.lambda[0] * scale << ", " << est.lambda[1] * scale << ", "
            << est.lambda[2] * scale << "), sum " << est.sum * scale << " +- "
            << est.sum_stderr * scale << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- mix

int run_mix(const CommonOptions& common, int grid, int steps, const std::string& init,
            double s, double kappa, int samples, int k_cutoff) {
  const abclab::NoiseConfig cfg{common.u_max, common.seed};
  const abclab::NoisePath path = abclab::noise_path(
      cfg, abclab::streams::domain(abclab::streams::kMainPath, common.stream), steps);
  std::vector<int> record(steps + 1);
  for (int i = 0; i <= steps; ++i) record[i] = i;

  // quick top-exponent probe fixes the resolution horizon ln(N/2) / lambda1
  const abclab::TopLyapunovResult probe =
      abclab::top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(0, 0, 1), 2000, 8);
  const double lambda1 = std::max(probe.estimate.lambda, 1e-6);
  const double horizon = std::log(grid / 2.0) / lambda1;

  json j;
  j["experiment"] = "mix";
  j["config"] = common.config_json("mix");
  j["config"]["grid"] = grid;
  j["config"]["steps"] = steps;
  j["config"]["init"] = init;
  j["config"]["s"] = s;
  j["config"]["kappa"] = kappa;
  j["lambda1_estimate"] = probe.estimate.lambda;
  j["resolution_horizon"] = horizon;

  std::string csv = "t,value,stderr\n";
  std::vector<double> values;
  const double scale = common.rate_scale();

  if (kappa == 0.0) {
    const abclab::AnalyticScalar scalar = abclab::make_named_scalar(init);
    const abclab::SpectralScalarField field0 = abclab::init_field(scalar, grid);
    const auto series = abclab::pullback_evolve(field0, path, record, scalar);
    double l2_0 = series[0].l2_norm(), l2_drift = 0.0;
    json jseries = json::array();
    for (int t = 0; t <= steps; ++t) {
      const double v = abclab::mixing_norm(series[t], s);
      values.push_back(v);
      csv += std::to_string(t) + "," + fmt(v) + ",\n";
      jseries.push_back({{"t", t}, {"value", v}});
      l2_drift = std::max(l2_drift, std::abs(series[t].l2_norm() - l2_0) / l2_0);
    }
    j["series"] = jseries;
    j["l2_relative_drift"] = l2_drift;
  } else {
    if (samples < 100) throw CLI::ValidationError("--samples", "need at least 100");
    const abclab::AnalyticScalar scalar = abclab::make_named_scalar(init);
    const abclab::SpectralScalarField field0 = abclab::init_field(scalar, grid);
    const auto series = abclab::hs_norm_diffusive(scalar, field0.l2_norm(), path, kappa,
                                                  k_cutoff, s, samples, record);
    json jseries = json::array();
    for (const auto& pt : series) {
      values.push_back(pt.value);
      csv += std::to_string(pt.t) + "," + fmt(pt.value) + "," + fmt(pt.stderr_) + "\n";
      jseries.push_back({{"t", pt.t},
                         {"value", pt.value},
                         {"stderr", pt.stderr_},
                         {"noise_floor", pt.noise_floor},
                         {"truncation_bound", pt.truncation_bound}});
    }
    j["series"] = jseries;
    j["config"]["samples"] = samples;
    j["config"]["k_cutoff"] = k_cutoff;
  }

  // fit inside the resolution horizon, restricted to positive values
  int n1 = std::min(steps, std::max(2, static_cast<int>(std::floor(horizon))));
  while (n1 > 1 && values[n1] <= 0.0) --n1;
  try {
    const abclab::RateFit fit = abclab::fit_exponential_rate(values, 0, n1);
    j["fit"] = fit_json(fit, scale);
  } catch (const std::exception& e) {
    j["fit"] = {{"error", e.what()}};
  }

  if (common.want_csv()) write_text(common.out + ".csv", csv);
  if (common.want_json()) write_json(common.out + ".json", j);
  std::cout << "mix: " << values.size() << " records";
  if (j.contains("fit") && j["fit"].contains("rate"))
    std::cout << ", fitted rate " << double(j["fit"]["rate"]) << " (r2 "
              << double(j["fit"]["r2"]) << ", window [0," << n1 << "])";
  std::cout << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ dynamo

int run_dynamo(const CommonOptions& common, int grid, int steps, const std::string& p_text,
               const std::string& b0_name) {
  const double p = p_text == "inf" ? abclab::kPInfinity : std::stod(p_text);
  const abclab::NoiseConfig cfg{common.u_max, common.seed};
  const abclab::NoisePath path = abclab::noise_path(
      cfg, abclab::streams::domain(abclab::streams::kMainPath, common.stream), steps);
  std::vector<int> record(steps + 1);
  for (int i = 0; i <= steps; ++i) record[i] = i;

  const abclab::MagneticInitialField b0 = abclab::make_magnetic_field(b0_name);
  const abclab::GrowthSeries series = abclab::magnetic_growth_series(b0, path, p, grid, record);

  const abclab::TopLyapunovResult lam =
      abclab::top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(0, 0, 1), 3000, 24);
  const int n0 = steps > 8 ? 5 : 1;
  const abclab::DynamoRateReport report =
      abclab::dynamo_rate(series, n0, steps, lam.estimate);
  const double scale = common.rate_scale();

  if (common.want_csv()) {
    std::string csv = "n,norm\n";
    for (std::size_t i = 0; i < series.norms.size(); ++i)
      csv += std::to_string(series.iterations[i]) + "," + fmt(series.norms[i]) + "\n";
    write_text(common.out + ".csv", csv);
  }
  if (common.want_json()) {
    json j;
    j["experiment"] = "dynamo";
    j["config"] = common.config_json("dynamo");
    j["config"]["grid"] = grid;
    j["config"]["steps"] = steps;
    j["config"]["p"] = p_text;
    j["config"]["b0"] = b0_name;
    json jseries = json::array();
    for (std::size_t i = 0; i < series.norms.size(); ++i)
      jseries.push_back({{"n", series.iterations[i]}, {"norm", series.norms[i]}});
    j["series"] = jseries;
    j["fit"] = fit_json(report.fit, scale);
    j["lambda1"] = report.lambda1 * scale;
    j["lambda1_stderr"] = report.lambda1_stderr * scale;
    j["eta_at_least_lambda1_within_3se"] = report.eta_at_least_lambda1;
    write_json(common.out + ".json", j);
  }
  std::cout << "dynamo: eta = " << report.fit.rate * scale << " (r2 " << report.fit.r2
            << "), lambda1 = " << report.lambda1 * scale << ", eta >= lambda1 - 3se: "
            << (report.eta_at_least_lambda1 ? "yes" : "no") << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ verify

int run_verify(const CommonOptions& common, double h) {
  const std::vector<abclab::CertificateReport> reports = {
      abclab::verify_volume_preservation(10000, common.seed, common.u_max),
      abclab::verify_one_point_submersion(h),
      abclab::verify_projective_submersion(h),
      abclab::verify_two_point_submersion(h),
      abclab::verify_lyapunov_surjectivity(h)};
  bool all_pass = true;
  json jcerts = json::array();
  for (const auto& rep : reports) {
    all_pass = all_pass && rep.pass;
    std::cout << (rep.pass ? "PASS " : "FAIL ") << rep.name << "\n";
    json jc;
    jc["name"] = rep.name;
    jc["pass"] = rep.pass;
    json checks = json::array();
    for (const auto& c : rep.checks)
      checks.push_back({{"what", c.what},
                        {"pass", c.pass},
                        {"value", c.value},
                        {"target", c.target},
                        {"tolerance", c.tolerance}});
    jc["checks"] = checks;
    jc["warnings"] = rep.warnings;
    jcerts.push_back(jc);
    for (const auto& w : rep.warnings) std::cout << "  note: " << w << "\n";
  }
  if (common.want_json()) {
    json j;
    j["experiment"] = "verify";
    j["config"] = common.config_json("verify");
    j["certificates"] = jcerts;
    write_json(common.out + ".json", j);
  }
  return all_pass ? kExitOk : kExitCertificate;
}

// ----------------------------------------------------------------- control

json plan_to_json(const abclab::ControlPlan& plan) {
  json samples = json::array();
  for (const auto& w : plan.samples)
    samples.push_back({w.amp_a, w.amp_b, w.amp_c, w.phase_a, w.phase_b, w.phase_c});
  json j;
  j["samples"] = samples;
  j["length"] = plan.samples.size();
  j["position_error"] = plan.position_error;
  j["position_error_second"] = plan.position_error_second;
  j["direction_error"] = plan.direction_error;
  return j;
}

int run_control(const CommonOptions& common, const std::string& kind, const std::string& from,
                const std::string& to, const std::string& from_v, const std::string& to_v,
                const std::string& from2, const std::string& to2, double epsilon) {
  json j;
  j["experiment"] = "control";
  j["config"] = common.config_json("control");
  j["config"]["kind"] = kind;
  abclab::ControlPlan plan;
  if (kind == "one-point") {
    plan = abclab::plan_one_point(parse_vec3(from, "--from"), parse_vec3(to, "--to"),
                                  common.u_max);
  } else if (kind == "projective") {
    plan = abclab::plan_projective(parse_vec3(from, "--from"), parse_vec3(from_v, "--from-v"),
                                   parse_vec3(to, "--to"), parse_vec3(to_v, "--to-v"),
                                   common.u_max);
  } else {
    plan = abclab::plan_two_point(parse_vec3(from, "--from"), parse_vec3(from2, "--from2"),
                                  parse_vec3(to, "--to"), parse_vec3(to2, "--to2"),
                                  common.u_max, epsilon);
    j["config"]["epsilon"] = epsilon;
  }
  j["plan"] = plan_to_json(plan);
  if (common.want_json()) write_json(common.out + ".json", j);
  std::cout << j["plan"].dump(2) << "\n";
  std::cout << "control " << kind << ": " << plan.samples.size() << " steps, position error "
            << plan.position_error;
  if (kind == "projective") std::cout << ", direction error " << plan.direction_error;
  if (kind == "two-point") std::cout << ", second endpoint " << plan.position_error_second;
  std::cout << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- chain-stats

int run_chain_stats(const CommonOptions& common, long long steps, int bins, long long burn_in) {
  const abclab::NoiseConfig cfg{common.u_max, common.seed};
  const abclab::UniformityReport rep =
      abclab::one_point_uniformity(cfg, Vec3(0, 0, 0), steps, bins, burn_in);
  if (common.want_json()) {
    json j;
    j["experiment"] = "chain-stats";
    j["config"] = common.config_json("chain-stats");
    j["config"]["steps"] = steps;
    j["config"]["bins"] = bins;
    j["config"]["burn_in"] = burn_in;
    j["chi_square"] = rep.chi_square;
    j["dof"] = rep.dof;
    j["p_value"] = rep.p_value;
    j["expected_per_bin"] = rep.expected_per_bin;
    write_json(common.out + ".json", j);
  }
  std::cout << "chain-stats: chi2 = " << rep.chi_square << " (dof " << rep.dof
            << "), p = " << rep.p_value << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized ABC flow laboratory"};
  app.require_subcommand(1);

  // lyapunov
  CommonOptions ly_common;
  int ly_steps = 10000, ly_ensemble = 100;
  std::string ly_x0 = "0,0,0", ly_v0 = "0,0,1";
  auto* ly = app.add_subcommand("lyapunov", "top Lyapunov exponent");
  add_common(ly, ly_common, "lyapunov");
  ly->add_option("--steps", ly_steps, "iterations per trajectory")->check(CLI::PositiveNumber);
  ly->add_option("--ensemble", ly_ensemble, "trajectories")->check(CLI::PositiveNumber);
  ly->add_option("--x0", ly_x0, "initial point x,y,z");
  ly->add_option("--v0", ly_v0, "initial direction x,y,z");

  // spectrum
  CommonOptions sp_common;
  int sp_steps = 10000, sp_ensemble = 100;
  std::string sp_x0 = "0,0,0";
  auto* sp = app.add_subcommand("spectrum", "full Lyapunov spectrum (QR method)");
  add_common(sp, sp_common, "spectrum");
  sp->add_option("--steps", sp_steps, "iterations per trajectory")->check(CLI::PositiveNumber);
  sp->add_option("--ensemble", sp_ensemble, "trajectories")->check(CLI::PositiveNumber);
  sp->add_option("--x0", sp_x0, "initial point x,y,z");

  // mix
  CommonOptions mx_common;
  int mx_grid = 64, mx_steps = 20, mx_samples = 10000, mx_cutoff = 4;
  double mx_s = 1.0, mx_kappa = 0.0;
  std::string mx_init = "sinx";
  auto* mx = app.add_subcommand("mix", "passive-scalar mixing experiment");
  add_common(mx, mx_common, "mix");
  mx->add_option("--grid", mx_grid, "grid points per axis")->check(CLI::PositiveNumber);
  mx->add_option("--steps", mx_steps, "iterations")->check(CLI::PositiveNumber);
  mx->add_option("--init", mx_init, "initial scalar (sinx, sinx+cos2y, ...)");
  mx->add_option("--s", mx_s, "Sobolev exponent for the H^{-s} mix-norm")
      ->check(CLI::PositiveNumber);
  mx->add_option("--kappa", mx_kappa, "diffusivity (0 = pure transport)")
      ->check(CLI::NonNegativeNumber);
  mx->add_option("--samples", mx_samples, "Monte Carlo samples (kappa > 0)")
      ->check(CLI::PositiveNumber);
  mx->add_option("--k-cutoff", mx_cutoff, "spectral truncation (kappa > 0)")
      ->check(CLI::Range(2, 64));

  // dynamo
  CommonOptions dy_common;
  int dy_grid = 32, dy_steps = 30;
  std::string dy_p = "1", dy_b0 = "constant-z";
  auto* dy = app.add_subcommand("dynamo", "ideal kinematic dynamo growth");
  add_common(dy, dy_common, "dynamo");
  dy->add_option("--grid", dy_grid, "quadrature grid per axis")->check(CLI::PositiveNumber);
  dy->add_option("--steps", dy_steps, "iterations")->check(CLI::PositiveNumber);
  dy->add_option("--p", dy_p, "L^p exponent (>= 1, or inf)");
  dy->add_option("--b0", dy_b0, "initial field (constant-z, constant-x, abc)");

  // verify
  CommonOptions vf_common;
  double vf_h = 1e-5;
  auto* vf = app.add_subcommand("verify", "matrix/rank certificates");
  add_common(vf, vf_common, "verify");
  vf->add_option("--fd-step", vf_h, "finite-difference step")->check(CLI::PositiveNumber);

  // control
  CommonOptions ct_common;
  std::string ct_kind = "one-point", ct_from = "0,0,0", ct_to = "0,0,0";
  std::string ct_from_v = "0,0,1", ct_to_v = "1,0,0", ct_from2 = "1,1,1", ct_to2 = "1,1,1";
  double ct_eps = 0.1;
  auto* ct = app.add_subcommand("control", "constructive controllability plans");
  add_common(ct, ct_common, "control");
  ct->add_option("--kind", ct_kind, "one-point | projective | two-point")
      ->check(CLI::IsMember({"one-point", "projective", "two-point"}));
  ct->add_option("--from", ct_from, "start point x,y,z");
  ct->add_option("--to", ct_to, "target point x,y,z");
  ct->add_option("--from-v", ct_from_v, "start direction (projective)");
  ct->add_option("--to-v", ct_to_v, "target direction (projective)");
  ct->add_option("--from2", ct_from2, "second start point (two-point)");
  ct->add_option("--to2", ct_to2, "second target point (two-point)");
  ct->add_option("--epsilon", ct_eps, "two-point meeting gap")->check(CLI::PositiveNumber);

  // chain-stats
  CommonOptions ch_common;
  long long ch_steps = 1000000, ch_burn = 1000;
  int ch_bins = 8;
  auto* ch = app.add_subcommand("chain-stats", "one-point chain uniformity diagnostic");
  add_common(ch, ch_common, "chain-stats");
  ch->add_option("--steps", ch_steps, "chain length")->check(CLI::PositiveNumber);
  ch->add_option("--bins", ch_bins, "bins per axis")->check(CLI::Range(2, 64));
  ch->add_option("--burn-in", ch_burn, "discarded prefix")->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> args = assemble_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11's vector parse wants reversed order
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (ly->parsed()) return run_lyapunov(ly_common, ly_steps, ly_ensemble,
                                          parse_vec3(ly_x0, "--x0"), parse_vec3(ly_v0, "--v0"));
    if (sp->parsed()) return run_spectrum(sp_common, sp_steps, sp_ensemble,
                                          parse_vec3(sp_x0, "--x0"));
    if (mx->parsed())
      return run_mix(mx_common, mx_grid, mx_steps, mx_init, mx_s, mx_kappa, mx_samples,
                     mx_cutoff);
    if (dy->parsed()) return run_dynamo(dy_common, dy_grid, dy_steps, dy_p, dy_b0);
    if (vf->parsed()) return run_verify(vf_common, vf_h);
    if (ct->parsed())
      return run_control(ct_common, ct_kind, ct_from, ct_to, ct_from_v, ct_to_v, ct_from2,
                         ct_to2, ct_eps);
    if (ch->parsed()) return run_chain_stats(ch_common, ch_steps, ch_bins, ch_burn);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
