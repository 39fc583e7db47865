// kwidth: spectra, trace decay, bounds and separation experiments for
// activation-induced dot-product kernels on the sphere.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kwidth/bounds.hpp"
#include "kwidth/check.hpp"
#include "kwidth/experiment.hpp"
#include "kwidth/io.hpp"
#include "kwidth/spectrum.hpp"

#ifndef KWIDTH_VERSION
#define KWIDTH_VERSION "dev"
#endif

namespace {

using kwidth::io::json;

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string activation = "step:0:1:0";
  int d = 3;
  std::uint64_t mmax = 0;
  std::vector<std::uint64_t> m;
  std::vector<double> r{1.0};
  int grid = 4;
  std::uint64_t seed = 0;
  int trials = 20;
  int samples = 0;
  double ridge = 1e-10;
  std::string out = "-";
  std::string format = "csv";
  double tol = 1e-3;
  int degree_cap = 2000;
  int per_decade = 20;
  bool trend = false;
  std::string direction = "e1";
  std::string features = "random_neuron";
  bool force_direction = false;
  std::vector<std::string> only;
  std::string config;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

kwidth::SpectrumOptions spectrum_options(const Options& o) {
  kwidth::SpectrumOptions s;
  s.degree_cap = o.degree_cap;
  s.tail_ratio = o.tol;
  return s;
}

std::vector<std::uint64_t> m_grid(const Options& o, std::uint64_t default_max) {
  if (!o.m.empty()) {
    auto ms = o.m;
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    return ms;
  }
  return kwidth::log_spaced_m(o.mmax > 0 ? o.mmax : default_max, o.per_decade);
}

json config_echo(const Options& o, const std::string& command) {
  json c;
  c["command"] = command;
  c["activation"] = o.activation;
  c["d"] = o.d;
  c["mmax"] = o.mmax;
  c["m"] = o.m;
  c["r"] = o.r;
  c["grid"] = o.grid;
  c["seed"] = o.seed;
  c["trials"] = o.trials;
  c["samples"] = o.samples;
  c["ridge"] = o.ridge;
  c["tol"] = o.tol;
  c["degree_cap"] = o.degree_cap;
  c["per_decade"] = o.per_decade;
  return c;
}

json provenance(const Options& o, const std::string& command) {
  json p;
  p["version"] = KWIDTH_VERSION;
  p["config"] = config_echo(o, command);
  p["degree_cap"] = o.degree_cap;
  p["tail_ratio"] = o.tol;
  p["seed"] = o.seed;
  return p;
}

void emit(const Options& o, const kwidth::io::Table& table, const json& prov) {
  std::ostringstream buf;
  if (o.format == "json") {
    kwidth::io::write_json(buf, table, prov);
  } else {
    kwidth::io::write_csv(buf, table);
  }
  if (o.out == "-") {
    std::cout << buf.str();
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot open output file '" + o.out + "'");
  f << buf.str();
}

kwidth::ActivationSpec activation(const Options& o) {
  try {
    return kwidth::parse_activation(o.activation);
  } catch (const kwidth::DomainError& e) {
    throw UsageError(e.what());
  }
}

int cmd_spectrum(const Options& o) {
  const auto spec = activation(o);
  auto sopts = spectrum_options(o);
  sopts.mc_samples = o.samples;
  sopts.seed = o.seed;
  const auto ks = kwidth::build_spectrum(spec, o.d, o.mmax > 0 ? o.mmax : 100, sopts);
  auto prov = provenance(o, "spectrum");
  prov["trace_method"] = kwidth::trace_method_name(ks.trace_info.method);
  prov["trace"] = ks.trace;
  prov["residual"] = ks.residual;
  prov["max_degree"] = ks.max_degree();
  prov["selected_threshold"] = ks.selected_threshold;
  prov["nodes_per_piece"] = ks.nodes_per_piece;
  if (ks.trace_info.mc_samples > 0) {
    prov["mc_trace"] = ks.trace_info.mc_value;
    prov["mc_stderr"] = ks.trace_info.mc_stderr;
    prov["mc_samples"] = ks.trace_info.mc_samples;
  }
  emit(o, kwidth::io::spectrum_table(ks), prov);
  return kExitOk;
}

int cmd_decay(const Options& o) {
  const auto spec = activation(o);
  const auto ms = m_grid(o, 10000);
  const auto ks = kwidth::build_spectrum(spec, o.d, std::max<std::uint64_t>(ms.back(), 1), spectrum_options(o));
  const auto td = kwidth::trace_decay(ks, ms);
  const auto overlay = kwidth::io::overlay_for(spec, o.d, ms);
  auto prov = provenance(o, "decay");
  prov["trace_method"] = kwidth::trace_method_name(ks.trace_info.method);
  prov["max_degree"] = ks.max_degree();
  prov["bound_validity"] = overlay.validity;
  emit(o, kwidth::io::decay_table(td, &overlay), prov);
  return kExitOk;
}

int cmd_supdecay(const Options& o) {
  const auto spec = activation(o);
  const auto ms = m_grid(o, 10000);
  auto prov = provenance(o, o.trend ? "supdecay --trend" : "supdecay");
  prov["grid_note"] = "maximum over a finite (gamma, b) grid: a lower bound on the true sup";
  if (o.trend) {
    const auto study = kwidth::r_trend_study(spec.kind, o.d, o.r, ms.back(), o.grid, o.per_decade);
    prov["warnings"] = study.warnings;
    for (const auto& w : study.warnings) std::cerr << "warning: " << w << '\n';
    emit(o, kwidth::io::rtrend_table(study), prov);
    return kExitOk;
  }
  kwidth::io::Table all;
  std::vector<std::string> warnings;
  for (double r : o.r) {
    const auto sup = kwidth::sup_trace_decay(spec.kind, spec.alpha, r, o.d, o.grid, ms, spectrum_options(o));
    auto t = kwidth::io::supdecay_table(sup);
    if (all.columns.empty()) all = t;
    else all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
    for (std::size_t i = 0; i < ms.size(); ++i) {
      if (!sup.argmax_is_r0(i)) {
        warnings.push_back("r=" + kwidth::io::format_double(r) + ": argmax differs from (r,0) at m=" +
                           std::to_string(ms[i]));
      }
    }
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  prov["warnings"] = warnings;
  emit(o, all, prov);
  return kExitOk;
}

int cmd_bounds(const Options& o) {
  const auto spec = activation(o);
  const auto ms = m_grid(o, 10000);
  std::vector<kwidth::BoundCurve> curves;
  const int alpha = spec.kind == kwidth::Kind::relu_alpha ? spec.alpha : 0;
  if (o.d >= 3) curves.push_back(kwidth::relu_alpha_lower(o.d, alpha, ms));
  curves.push_back(kwidth::smooth_upper(o.d, ms));
  for (double r : o.r) curves.push_back(kwidth::arctan_upper(o.d, r, ms));
  auto prov = provenance(o, "bounds");
  json notes = json::array();
  for (const auto& n : kwidth::smooth_large_r_regimes()) {
    notes.push_back({{"label", n.label}, {"regime", n.regime}, {"claim", n.claim}});
  }
  prov["regime_notes"] = notes;
  prov["q_factor"] = kwidth::q_factor((2.0 * alpha + 1.0) / std::max(o.d - 1, 1), o.d);
  emit(o, kwidth::io::bounds_table(curves), prov);
  return kExitOk;
}

int cmd_separation(const Options& o) {
  const auto spec = activation(o);
  std::vector<std::uint64_t> ms = o.m.empty() ? std::vector<std::uint64_t>{64, 128, 256} : o.m;
  std::vector<kwidth::SeparationReport> reports;
  bool ok = true;
  for (auto m : ms) {
    kwidth::SeparationConfig cfg;
    cfg.dimension = o.d;
    cfg.target = spec;
    cfg.feature_count = static_cast<int>(m);
    cfg.train_samples = o.samples;
    cfg.ridge = o.ridge;
    cfg.seed = o.seed;
    cfg.trials = o.trials;
    cfg.force_direction = o.force_direction;
    cfg.direction = o.direction == "random" ? kwidth::DirectionChoice::random : kwidth::DirectionChoice::fixed_e1;
    cfg.feature_kind = o.features == "harmonic" ? kwidth::FeatureKind::spherical_harmonic_proxy
                                                : kwidth::FeatureKind::random_neuron;
    reports.push_back(kwidth::random_feature_fit(cfg));
    const auto& r = reports.back();
    if (!r.respects_lower_bound(3.0)) {
      ok = false;
      std::cerr << "invariant violated: m=" << m << " mean error " << r.mean_error << " < Lambda(m) - 3 SE = "
                << r.lambda_m - 3.0 * r.std_error << '\n';
    }
    if (r.underdetermined) std::cerr << "note: m=" << m << " has fewer training samples than features\n";
    if (r.rank_deficient_trials > 0) {
      std::cerr << "note: m=" << m << " solved " << r.rank_deficient_trials
                << " rank-deficient trials by the minimum-norm convention\n";
    }
  }
  auto prov = provenance(o, "separation");
  prov["direction"] = o.direction;
  prov["features"] = o.features;
  prov["ridge_note"] = "ridge-regularized least squares; the unregularized infimum is approached as ridge -> 0";
  json per_trial = json::object();
  for (const auto& r : reports) per_trial[std::to_string(r.config.feature_count)] = r.errors;
  prov["per_trial_errors"] = per_trial;
  emit(o, kwidth::io::separation_table(reports), prov);
  return ok ? kExitOk : kExitNumeric;
}

int cmd_check(const Options& o, bool stress) {
  auto suite = kwidth::check::default_suite(stress ? o.d : 0);
  std::vector<std::string> names;
  for (const auto& e : suite) names.push_back(e.name);
  for (const auto& want : o.only) {
    if (std::find(names.begin(), names.end(), want) == names.end()) {
      throw UsageError("unknown check '" + want + "'");
    }
  }
  int failed = 0;
  int ran = 0;
  std::printf("%-24s %-11s %-6s %8s  %s\n", "check", "module", "result", "seconds", "detail");
  for (const auto& e : suite) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), e.name) == o.only.end()) continue;
    const auto r = e.run();
    ++ran;
    failed += r.passed ? 0 : 1;
    std::printf("%-24s %-11s %-6s %8.2f  %s\n", r.name.c_str(), e.module.c_str(), r.passed ? "PASS" : "FAIL",
                r.seconds, r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d checks passed\n", ran - failed, ran);
  return failed == 0 ? kExitOk : kExitNumeric;
}

/// Flat key=value file; keys are long option names without the dashes.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(lineno) + ": invalid key");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Mercer spectra and trace decay of activation kernels on the sphere", "kwidth"};
  app.set_version_flag("--version", KWIDTH_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--activation", o.activation, "kind:alpha:gamma:bias, e.g. relu:1:1.0:0.0");
    sub->add_option("--d", o.d, "ambient dimension d (sphere S^{d-1})")->check(CLI::Range(2, 100000));
    sub->add_option("--out", o.out, "output path, - for stdout");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--config", o.config, "flat key=value file with option defaults");
  };
  auto spectral = [&](CLI::App* sub) {
    sub->add_option("--mmax", o.mmax, "largest m");
    sub->add_option("--m", o.m, "explicit m values")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("--tol", o.tol, "tail-safety ratio for the degree cut")->check(CLI::PositiveNumber);
    sub->add_option("--degree-cap", o.degree_cap, "largest degree computed")->check(CLI::Range(1, 100000));
    sub->add_option("--per-decade", o.per_decade, "m grid points per decade")->check(CLI::Range(1, 1000));
  };

  auto* spectrum = app.add_subcommand("spectrum", "per-degree eigenvalues mu_k with multiplicities");
  common(spectrum);
  spectral(spectrum);
  spectrum->add_option("--samples", o.samples, "Monte-Carlo samples for a trace cross-check (0 = none)");

  auto* decay = app.add_subcommand("decay", "trace decay Lambda(m) with a reference-rate overlay");
  common(decay);
  spectral(decay);

  auto* supdecay = app.add_subcommand("supdecay", "sup of Lambda over gamma + |b| <= r on a grid");
  common(supdecay);
  spectral(supdecay);
  supdecay->add_option("--r", o.r, "radius r (comma list)")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  supdecay->add_option("--grid", o.grid, "grid size G")->check(CLI::Range(1, 64));
  supdecay->add_flag("--trend", o.trend, "emit the slope-versus-r table instead of the curves");

  auto* bounds = app.add_subcommand("bounds", "reference rate curves");
  common(bounds);
  bounds->add_option("--mmax", o.mmax, "largest m");
  bounds->add_option("--m", o.m, "explicit m values")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  bounds->add_option("--per-decade", o.per_decade, "m grid points per decade")->check(CLI::Range(1, 1000));
  bounds->add_option("--r", o.r, "radius r for the arctan rate (comma list)")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* separation = app.add_subcommand("separation", "random-feature fits of a single neuron");
  common(separation);
  separation->add_option("--m", o.m, "feature counts")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  separation->add_option("--trials", o.trials, "independent trials")->check(CLI::Range(1, 1000000));
  separation->add_option("--samples", o.samples, "training samples n (0 = max(20 m, 100))")->check(CLI::NonNegativeNumber);
  separation->add_option("--ridge", o.ridge, "ridge added to the normal equations")->check(CLI::NonNegativeNumber);
  separation->add_option("--direction", o.direction, "target direction")->check(CLI::IsMember({"e1", "random"}));
  separation->add_option("--features", o.features, "feature family")->check(CLI::IsMember({"random_neuron", "harmonic"}));
  separation->add_flag("--force-direction", o.force_direction, "diagnostic: first feature uses the target direction");

  auto* check = app.add_subcommand("check", "run the invariant suite");
  check->add_option("--only", o.only, "run only these checks")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* stress = check->add_option("--d", o.d, "add this dimension to the dimension sweeps (slow for large d)");
  check->add_option("--config", o.config, "flat key=value file with option defaults");

  // Config values are injected ahead of the command-line flags so explicit
  // flags win; unknown keys fail like unknown flags.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      auto injected = read_config(path);
      std::size_t at = 0;
      for (std::size_t j = 0; j < args.size(); ++j) {
        if (app.get_subcommand_no_throw(args[j]) != nullptr) {
          at = j + 1;
          break;
        }
      }
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
      break;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*spectrum) return cmd_spectrum(o);
    if (*decay) return cmd_decay(o);
    if (*supdecay) return cmd_supdecay(o);
    if (*bounds) return cmd_bounds(o);
    if (*separation) return cmd_separation(o);
    if (*check) return cmd_check(o, stress->count() > 0);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const kwidth::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
