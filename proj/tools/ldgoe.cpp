// Command-line frontend: every computation as a reproducible, file-driven
// experiment emitting CSV or JSON.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldgoe/errors.hpp"
#include "ldgoe/free_convolution.hpp"
#include "ldgoe/json_io.hpp"
#include "ldgoe/prior_rates.hpp"
#include "ldgoe/rate_function.hpp"
#include "ldgoe/rmt_lab.hpp"
#include "ldgoe/variational.hpp"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Grid {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  std::vector<double> points() const {
    std::vector<double> xs(count);
    double h = count > 1 ? (max - min) / static_cast<double>(count - 1) : 0.0;
    for (std::size_t i = 0; i < count; ++i)
      xs[i] = min + h * static_cast<double>(i);
    return xs;
  }
};

Grid parse_grid(const std::string& s) {
  Grid g;
  char extra;
  long long count = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lld%c", &g.min, &g.max, &count, &extra) != 3 ||
      count < 2)
    throw ConfigError("grid must be \"min:max:count\" with count >= 2");
  g.count = static_cast<std::size_t>(count);
  return g;
}

int precision = 12;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

std::string num(const ldgoe::ExtReal& v) {
  return v.is_infinite() ? "inf" : num(v.value());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + out_path);
  f << text;
}

std::string dump_json(const json& j) { return j.dump() + "\n"; }

ldgoe::AtomicMeasure load_measure_checked(const std::string& path) {
  if (path.empty()) throw ConfigError("--measure is required");
  std::ifstream probe(path);
  if (!probe) throw ConfigError("cannot open measure file: " + path);
  try {
    return ldgoe::load_measure(path);
  } catch (const json::exception& e) {
    throw ConfigError("measure file " + path + ": " + e.what());
  } catch (const ldgoe::Error& e) {
    throw ConfigError("measure file " + path + ": " + e.what());
  }
}

// Numbers are serialized through num() so --precision also pins JSON bytes.
json jnum(double v) { return json::parse(num(v)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"large-deviation rate functions for deformed GOE spectra"};
  app.require_subcommand(1);
  app.add_option("--precision", precision, "significant digits in output")
      ->capture_default_str();

  std::string measure_path, out_path, format = "csv", grid_str, compare_which;
  double t = 1.0, outlier = 0.0, lambda = 0.0, x = 0.0, window = 0.0;
  bool outlier_set = false;
  std::uint64_t seed = 1;
  std::int64_t n = 1000;
  int workers = 1, n_dim = 100, selberg_n = 2000;
  std::string n_list_str = "100:200:400";

  auto add_measure = [&](CLI::App* cmd) {
    cmd->add_option("--measure", measure_path, "measure JSON file");
    cmd->add_option("--t", t, "semicircle variance");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "output file (stdout if absent)");
    cmd->add_option("--format", format, "csv or json");
  };

  auto* c_rate = app.add_subcommand("rate", "rate-function curve as CSV with header lambda,rate,branch");
  add_measure(c_rate);
  add_out(c_rate);
  c_rate->add_option("--outlier", outlier, "outlier location")->required();
  c_rate->add_option("--grid", grid_str, "lambda grid min:max:count")->required();

  auto* c_edge = app.add_subcommand("edge", "support edge data as JSON");
  add_measure(c_edge);
  add_out(c_edge);

  auto* c_bbp = app.add_subcommand("bbp", "phase diagnostics as JSON");
  add_measure(c_bbp);
  add_out(c_bbp);
  c_bbp->add_option("--outlier", outlier, "outlier location")->required();

  auto* c_density = app.add_subcommand("density", "free-convolution density as CSV with header x,density");
  add_measure(c_density);
  add_out(c_density);
  c_density->add_option("--n", n, "number of grid points");

  auto* c_fixed = app.add_subcommand("fixedpoint", "fixed-point residual JSON");
  add_measure(c_fixed);
  add_out(c_fixed);
  c_fixed->add_option("--outlier", outlier, "outlier location")->required();
  c_fixed->add_option("--lambda", lambda, "evaluation point")->required();
  c_fixed->add_option("--seed", seed, "restart seed");

  auto* c_compare =
      app.add_subcommand("compare",
      "prior rate functions vs this one, CSV header x,prior_value,rate_value,abs_diff");
  c_compare->add_option("which", compare_which, "maida | mckenna | goe")
      ->required();
  add_measure(c_compare);
  add_out(c_compare);
  c_compare->add_option("--outlier", outlier, "outlier location")
      ->each([&](const std::string&) { outlier_set = true; });
  c_compare->add_option("--grid", grid_str, "x grid min:max:count")->required();

  auto* c_mc = app.add_subcommand("mc", "tail-probability Monte Carlo (JSON)");
  add_measure(c_mc);
  add_out(c_mc);
  c_mc->add_option("--outlier", outlier, "outlier location")->required();
  c_mc->add_option("--N", n_dim, "matrix dimension")->required();
  c_mc->add_option("--x", x, "deviation point")->required();
  c_mc->add_option("--window", window, "hit window (default from model)");
  c_mc->add_option("--n", n, "number of samples");
  c_mc->add_option("--seed", seed, "master seed");
  c_mc->add_option("--workers", workers, "worker threads");

  auto* c_selberg = app.add_subcommand("selberg", "log partition function JSON");
  c_selberg->add_option("--N", selberg_n, "matrix dimension")->required();
  c_selberg->add_option("--t", t, "variance");
  add_out(c_selberg);

  auto* c_dirichlet =
      app.add_subcommand("dirichlet-check", "eigenvector-mass Dirichlet test");
  add_measure(c_dirichlet);
  add_out(c_dirichlet);
  c_dirichlet->add_option("--outlier", outlier, "outlier location")->required();
  c_dirichlet->add_option("--N", n_dim, "matrix dimension");
  c_dirichlet->add_option("--n", n, "number of samples");
  c_dirichlet->add_option("--seed", seed, "master seed");
  c_dirichlet->add_option("--workers", workers, "worker threads");

  auto* c_converge =
      app.add_subcommand("converge", "mean smallest eigenvalue per N (JSON)");
  add_measure(c_converge);
  add_out(c_converge);
  c_converge->add_option("--outlier", outlier, "outlier location")->required();
  c_converge->add_option("--N-list", n_list_str, "colon-separated dimensions");
  c_converge->add_option("--n", n, "samples per dimension");
  c_converge->add_option("--seed", seed, "master seed");
  c_converge->add_option("--workers", workers, "worker threads");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);  // --help
      throw ConfigError(e.what());
    }

    if (format != "csv" && format != "json")
      throw ConfigError("--format must be csv or json");

    if (c_rate->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::DeformedModel model(m, t, outlier);
      Grid g = parse_grid(grid_str);
      auto curve = ldgoe::rate_curve(model, g.min, g.max, g.count);
      std::ostringstream os;
      os << "lambda,rate,branch\n";
      for (std::size_t i = 0; i < curve.grid.size(); ++i)
        os << num(curve.grid[i]) << ',' << num(curve.values[i]) << ','
           << ldgoe::branch_name(curve.branch[i]) << '\n';
      emit(out_path, os.str());
    } else if (c_edge->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::FreeConvContext ctx(m, t);
      json j{{"edge", jnum(ctx.edge())},
             {"shock", jnum(ctx.shock())},
             {"support_edge", jnum(ldgoe::support_edge(m))},
             {"right_edge", jnum(ctx.right_edge())}};
      emit(out_path, dump_json(j));
    } else if (c_bbp->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::DeformedModel model(m, t, outlier);
      bool bbp = outlier <= model.ctx().shock();
      json j{{"edge", jnum(model.ctx().edge())},
             {"ell_lambda", jnum(ldgoe::limit_smallest(model))},
             {"regime", bbp ? "bbp" : "bulk"}};
      if (model.outlier_at_support_edge())
        j["rho"] = nullptr;
      else
        j["rho"] = jnum(ldgoe::rho(model));
      emit(out_path, dump_json(j));
    } else if (c_density->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::FreeConvContext ctx(m, t);
      auto curve = ctx.density_curve(static_cast<std::size_t>(std::max<std::int64_t>(n, 2)));
      std::ostringstream os;
      os << "x,density\n";
      for (const auto& pt : curve)
        os << num(pt.x) << ',' << num(pt.density) << '\n';
      emit(out_path, os.str());
    } else if (c_fixed->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::DeformedModel model(m, t, outlier);
      auto rep = ldgoe::fixed_point_residual(model, lambda, 50, seed);
      json ys = json::array();
      for (double v : rep.argmin_y) ys.push_back(jnum(v));
      json j{{"lambda", jnum(rep.lambda)},
             {"rate", jnum(rep.rate)},
             {"residual", jnum(rep.residual)},
             {"argmin_y", ys},
             {"phi_at_argmin", jnum(rep.phi_at_argmin)}};
      emit(out_path, dump_json(j));
    } else if (c_compare->parsed()) {
      Grid g = parse_grid(grid_str);
      std::ostringstream os;
      os << "x,prior_value,rate_value,abs_diff\n";
      if (compare_which == "maida") {
        if (!outlier_set) throw ConfigError("compare maida needs --outlier");
        ldgoe::DeformedModel model(ldgoe::AtomicMeasure::dirac(0.0), 0.5, outlier);
        for (double xv : g.points()) {
          auto prior = ldgoe::maida_rate(outlier, xv);
          auto ours = ldgoe::rate(model, xv);
          double diff = (prior.is_infinite() || ours.is_infinite())
                            ? (prior.is_infinite() == ours.is_infinite() ? 0.0 : 1.0 / 0.0)
                            : std::abs(prior.value() - ours.value());
          os << num(xv) << ',' << num(prior) << ',' << num(ours) << ','
             << num(diff) << '\n';
        }
      } else if (compare_which == "mckenna") {
        auto m = load_measure_checked(measure_path);
        ldgoe::DeformedModel model(m, 1.0, ldgoe::support_edge(m));
        for (double xv : g.points()) {
          double prior = ldgoe::mckenna_rate_details(m, xv, &model.ctx()).value;
          double ours = ldgoe::rate(model, xv).value();
          os << num(xv) << ',' << num(prior) << ',' << num(ours) << ','
             << num(std::abs(prior - ours)) << '\n';
        }
      } else if (compare_which == "goe") {
        ldgoe::DeformedModel model(ldgoe::AtomicMeasure::dirac(0.0), t, 0.0);
        for (double xv : g.points()) {
          double prior = ldgoe::goe_reference_rate(t, xv);
          double ours = ldgoe::rate(model, xv).value();
          os << num(xv) << ',' << num(prior) << ',' << num(ours) << ','
             << num(std::abs(prior - ours)) << '\n';
        }
      } else {
        throw ConfigError("compare: which must be maida, mckenna or goe");
      }
      emit(out_path, os.str());
    } else if (c_mc->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::DeformedModel model(m, t, outlier);
      double w = window > 0.0 ? window : ldgoe::default_window(model);
      auto rep = ldgoe::ldp_tail_estimate(model, n_dim, x, w, n, seed, workers);
      emit(out_path, dump_json(ldgoe::report_to_json(rep)));
    } else if (c_selberg->parsed()) {
      json j{{"N", selberg_n},
             {"t", jnum(t)},
             {"log_z", jnum(ldgoe::selberg_log_partition(selberg_n, t))},
             {"c_t", jnum(ldgoe::c_t(t))}};
      if (selberg_n >= 2)
        j["ratio"] = jnum(ldgoe::selberg_partition_ratio(selberg_n, t));
      emit(out_path, dump_json(j));
    } else if (c_dirichlet->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::DeformedModel model(m, t, outlier);
      ldgoe::GoeSpec spec{n_dim, t, seed};
      auto rep = ldgoe::dirichlet_law_check(spec, model, n, seed, workers);
      emit(out_path, dump_json(ldgoe::report_to_json(rep)));
    } else if (c_converge->parsed()) {
      auto m = load_measure_checked(measure_path);
      ldgoe::DeformedModel model(m, t, outlier);
      std::vector<int> n_list;
      std::stringstream ss(n_list_str);
      std::string tok;
      while (std::getline(ss, tok, ':')) n_list.push_back(std::stoi(tok));
      if (n_list.empty()) throw ConfigError("--N-list is empty");
      auto reps = ldgoe::convergence_check(model, n_list, n, seed, workers);
      json arr = json::array();
      for (const auto& r : reps) arr.push_back(ldgoe::report_to_json(r));
      emit(out_path, dump_json(arr));
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "ConfigError"}}.dump()
              << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "ComputeError"}}.dump()
              << std::endl;
    return 3;
  }
}
