#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "perifront/analysis.hpp"
#include "perifront/config.hpp"
#include "perifront/io.hpp"
#include "perifront/scenario.hpp"
#include "perifront/stationary.hpp"

namespace pf = perifront;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  double resolution = 1.0;
  std::string expect;
};

int cmd_run(const CommonFlags& flags, int snapshots) {
  const std::string text = pf::read_text_file(flags.config_path);
  pf::ScenarioOptions overrides;
  overrides.resolution_mult = flags.resolution;
  overrides.seed = flags.seed;
  pf::Scenario s = pf::load_scenario_config(text, overrides);
  if (!flags.expect.empty()) {
    const auto v = pf::verdict_from_string(flags.expect);
    if (!v) throw pf::ConfigError("--expect: unknown verdict kind '" + flags.expect + "'");
    s.expected = *v;
  }
  if (snapshots > 0) s.solver.snapshot_every = s.solver.t_end / snapshots;

  const std::string out = flags.out_dir.empty()
                              ? "runs/" + s.name + "-" + pf::content_hash_hex(text).substr(0, 8)
                              : flags.out_dir;
  std::printf("scenario %s: %s\n", s.name.c_str(), s.description.c_str());
  std::printf("  horizon %.6g, dt %.6g, scheme %s, cells %zu\n", s.solver.t_end, s.solver.dt,
              s.solver.scheme == pf::Scheme::IMEXDiffusion ? "imex" : "euler",
              s.mask.inside_cells().size());

  const pf::ScenarioResult r = pf::run_scenario(s);
  pf::write_run_artifacts(s, r, out, text);

  std::printf("verdict: %s%s (sup_tail=%.4f, compact_min_tail=%.4f",
              pf::to_string(r.verdict.kind).c_str(), r.verdict.persistent ? " [persistent]" : "",
              r.verdict.sup_tail, r.verdict.compact_min_tail);
  if (r.verdict.speed_right)
    std::printf(", speed_right=%.5f, r2=%.4f", *r.verdict.speed_right, r.verdict.r2_right);
  std::printf(")\n");
  if (!r.verdict.note.empty()) std::printf("note: %s\n", r.verdict.note.c_str());
  std::printf("artifacts: %s\n", out.c_str());

  if (s.expected && !pf::verdict_matches(*s.expected, r.verdict)) {
    std::fprintf(stderr, "expectation mismatch: expected %s, got %s\n",
                 pf::to_string(*s.expected).c_str(), pf::to_string(r.verdict.kind).c_str());
    return 2;
  }
  return 0;
}

pf::Reaction reaction_from_flags(const std::string& reaction_config, double theta) {
  if (!reaction_config.empty()) {
    const json j = json::parse(pf::read_text_file(reaction_config));
    return pf::parse_reaction(j.contains("reaction") ? j.at("reaction") : j, "reaction");
  }
  return pf::Reaction::cubic(theta);
}

int cmd_subsolution(const std::string& reaction_config, double theta, double lambda,
                    double Lambda, double beta, int samples, const std::string& out_dir) {
  const pf::Reaction f = reaction_from_flags(reaction_config, theta);
  const pf::SubsolutionProfile prof = pf::build_propdim_profile(f, lambda, Lambda, beta);
  const auto res = prof.alg_residuals();
  const double worst = pf::verify_propdim(prof, f, lambda, Lambda, prof.B_bar, samples);

  std::printf("H      = %.12g\nK      = %.12g\ngamma  = %.12g\nz1     = %.12g\n",
              prof.H, prof.K, prof.gamma, prof.z1);
  std::printf("Delta  = %.12g\nbeta   = %.12g\nmu     = %.12g (log %.6g)\nL      = %.12g\n",
              prof.delta, prof.beta, prof.mu(), prof.log_mu, prof.L());
  std::printf("B_bar  = %.12g, min f on [K,H] = %.12g\n", prof.B_bar, prof.min_f);
  std::printf("relations: slack1=%.3e slack2=%.3e res3=%.3e res4=%.3e res5=%.3e\n", res[0],
              res[1], res[2], res[3], res[4]);
  std::printf("worst residual of A h'' + B h' + f(h) at B=B_bar over %d samples: %.3e\n",
              samples, worst);

  if (!out_dir.empty()) {
    pf::ensure_directory(out_dir);
    std::vector<double> zs, hs;
    for (int k = 0; k <= 2000; ++k) {
      const double z = prof.L() * k / 2000.0;
      zs.push_back(z);
      hs.push_back(prof.h(z));
    }
    pf::write_two_column_csv(out_dir + "/h.csv", "z", "h", zs, hs);
    std::printf("wrote %s/h.csv\n", out_dir.c_str());
  }
  return worst >= -1e-8 ? 0 : 2;
}

int cmd_speed(const CommonFlags& flags) {
  const std::string text = pf::read_text_file(flags.config_path);
  pf::ScenarioOptions overrides;
  overrides.resolution_mult = flags.resolution;
  overrides.seed = flags.seed;
  pf::Scenario s = pf::load_scenario_config(text, overrides);
  const pf::ScenarioResult r = pf::run_scenario(s);

  json out;
  out["scenario"] = s.name;
  json speeds = json::object();
  for (const auto& probe : s.probes) {
    if (probe.kind != pf::ProbeSpec::Kind::LevelPos) continue;
    try {
      const pf::SpeedFit fit = pf::measure_speed(r.trajectory, probe.name);
      speeds[probe.name] = {{"speed", fit.speed}, {"r2", fit.r2}};
      std::printf("%-12s speed %.6f  (r2 %.5f)\n", probe.name.c_str(), fit.speed, fit.r2);
    } catch (const pf::LevelNeverCrossed&) {
      speeds[probe.name] = {{"speed", nullptr}};
      std::printf("%-12s level never crossed\n", probe.name.c_str());
    }
  }
  const pf::WStar w = pf::w_star(s.reaction, s.coeff.lambda, s.coeff.Lambda, 0.0);
  std::printf("w_star (no drift): %.6f%s\n", w.value, w.applicable ? "" : " [NotApplicable]");
  out["w_star"] = w.value;
  out["speeds"] = speeds;
  if (!flags.out_dir.empty()) {
    pf::ensure_directory(flags.out_dir);
    pf::write_text_file(flags.out_dir + "/speed.json", out.dump(2) + "\n");
    pf::write_trajectory_csv(flags.out_dir + "/probes.csv", r.trajectory);
  }
  return 0;
}

int cmd_energy(const std::string& reaction_config, double theta, double r, double extent,
               int resolution, int iters, const std::string& out_dir) {
  const pf::Reaction f = reaction_from_flags(reaction_config, theta);
  pf::PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = 1.0;
  spec.resolution = resolution;
  const int W = static_cast<int>(std::ceil(extent));
  const pf::DomainMask mask = pf::build_lattice_domain(pf::NoHole{}, spec, W, W);
  const pf::Coefficients A = pf::Coefficients::identity(mask);
  const pf::Vec2 center{0.5 * W, 0.5 * W};

  const pf::EnergyReport rep = pf::minimize_energy(mask, r, A, f, iters, center);
  std::printf("r = %.4f: energy %.8f, max %.6f, converged %s\n", r, rep.energy_value,
              rep.max_value, rep.converged ? "yes" : "no");
  for (const auto& [label, e] : rep.basins) std::printf("  start %-7s -> energy %.8f\n",
                                                        label.c_str(), e);
  if (!out_dir.empty()) {
    pf::ensure_directory(out_dir);
    json out;
    out["r"] = rep.r;
    out["energy"] = rep.energy_value;
    out["max_value"] = rep.max_value;
    out["converged"] = rep.converged;
    for (const auto& [label, e] : rep.basins) out["basins"][label] = e;
    pf::write_text_file(out_dir + "/energy.json", out.dump(2) + "\n");
    pf::write_snapshot_pgm(out_dir + "/minimizer.pgm", mask, rep.minimizer.u);
    std::printf("wrote %s/energy.json\n", out_dir.c_str());
  }
  return 0;
}

int cmd_front(const std::string& reaction_config, double theta, double tol,
              const std::string& out_dir) {
  const pf::Reaction f = reaction_from_flags(reaction_config, theta);
  const pf::FrontProfile front = pf::front_profile_1d(f, tol);
  std::printf("front speed c = %.8f  (states %.4f -> %.4f)\n", front.c, front.upper,
              front.lower);
  if (!out_dir.empty()) {
    pf::ensure_directory(out_dir);
    pf::write_two_column_csv(out_dir + "/front.csv", "z", "phi", front.z, front.phi);
    std::printf("wrote %s/front.csv\n", out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perifront: invasion and blocking in periodic perforated domains"};
  app.set_version_flag("--version", std::string(pf::kVersion));
  app.require_subcommand(1);

  CommonFlags flags;
  int snapshots = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario config and classify the outcome");
  run->add_option("--config", flags.config_path, "scenario config (JSON)")->required();
  run->add_option("--out", flags.out_dir, "output directory");
  run->add_option("--seed", flags.seed, "RNG seed recorded in the manifest");
  run->add_option("--resolution", flags.resolution, "resolution multiplier");
  run->add_option("--expect", flags.expect, "expected verdict kind (exit 2 on mismatch)");
  run->add_option("--snapshots", snapshots, "number of PGM snapshots to write");

  std::string reaction_config;
  double theta = 0.25, lambda = 1.0, Lambda = 1.0, beta = 0.0, tol = 1e-6;
  double r_ball = 6.0, extent = 20.0;
  int samples = 10000, resolution = 8, iters = 5000;

  CLI::App* sub = app.add_subcommand("subsolution", "build and verify the bump certificate");
  sub->add_option("--reaction-config", reaction_config, "JSON file with a reaction object");
  sub->add_option("--theta", theta, "cubic theta when no reaction config is given");
  sub->add_option("--lambda", lambda, "lower ellipticity bound");
  sub->add_option("--Lambda", Lambda, "upper ellipticity bound");
  sub->add_option("--beta", beta, "profile exponent; 0 selects the automatic search");
  sub->add_option("--samples", samples, "verification sample count");
  sub->add_option("--out", flags.out_dir, "directory for h.csv");

  CLI::App* speed = app.add_subcommand("speed", "run a scenario and fit level-set speeds");
  speed->add_option("--config", flags.config_path, "scenario config (JSON)")->required();
  speed->add_option("--out", flags.out_dir, "output directory");
  speed->add_option("--seed", flags.seed, "RNG seed");
  speed->add_option("--resolution", flags.resolution, "resolution multiplier");

  CLI::App* energy = app.add_subcommand("energy", "minimize the truncated-ball energy");
  energy->add_option("--reaction-config", reaction_config, "JSON file with a reaction object");
  energy->add_option("--theta", theta, "cubic theta when no reaction config is given");
  energy->add_option("--r", r_ball, "truncation radius");
  energy->add_option("--extent", extent, "window side length");
  energy->add_option("--grid-resolution", resolution, "cells per unit length");
  energy->add_option("--iters", iters, "iteration cap");
  energy->add_option("--out", flags.out_dir, "output directory");

  CLI::App* front = app.add_subcommand("front", "compute the 1D traveling front profile");
  front->add_option("--reaction-config", reaction_config, "JSON file with a reaction object");
  front->add_option("--theta", theta, "cubic theta when no reaction config is given");
  front->add_option("--tol", tol, "speed bisection tolerance");
  front->add_option("--out", flags.out_dir, "directory for front.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags, snapshots);
    if (sub->parsed())
      return cmd_subsolution(reaction_config, theta, lambda, Lambda, beta, samples,
                             flags.out_dir);
    if (speed->parsed()) return cmd_speed(flags);
    if (energy->parsed())
      return cmd_energy(reaction_config, theta, r_ball, extent, resolution, iters,
                        flags.out_dir);
    if (front->parsed()) return cmd_front(reaction_config, theta, tol, flags.out_dir);
  } catch (const pf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const pf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
