#pragma once

#include <mbkde/mbkde.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mbkde::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_invalid_run = 3;

//! Raised for bad user input after parsing; maps to exit code 2.
struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

inline std::size_t
default_workers()
{
  if (const char* env = std::getenv("MBKDE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
      return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::vector<std::string>
split_list(const std::string& text)
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos)
      out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<EstimatorKind>
parse_kinds(const std::string& text)
{
  if (detail::iequals(text, "all"))
    return { all_kinds.begin(), all_kinds.end() };
  std::vector<EstimatorKind> kinds;
  for (const auto& key : split_list(text)) {
    const auto k = kind_from_key(key);
    if (!k) {
      std::string msg = "unknown estimator '" + key + "'; expected one of:";
      for (auto kk : all_kinds)
        msg += ' ' + std::string(kind_key(kk));
      throw UsageError(msg);
    }
    if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end())
      kinds.push_back(*k);
  }
  if (kinds.empty())
    throw UsageError("--estimators needs at least one estimator");
  return kinds;
}

inline std::vector<double>
parse_numbers(const std::string& text, const char* what)
{
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(detail::parse_double(item));
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": not a number: " + item);
    }
  }
  if (out.empty())
    throw UsageError(std::string(what) + " needs at least one value");
  return out;
}

inline std::vector<double>
read_data_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot read data file '" + path + "'");
  std::vector<double> xs;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok))
      continue;
    std::string extra;
    double v = 0.0;
    try {
      v = detail::parse_double(tok);
    } catch (const std::exception&) {
      throw UsageError(path + ":" + std::to_string(no) + ": not a number: " + tok);
    }
    if (ls >> extra)
      throw UsageError(path + ":" + std::to_string(no) + ": expected one number per line");
    xs.push_back(v);
  }
  if (xs.empty())
    throw UsageError("data file '" + path + "' contains no values");
  return xs;
}

//! Writes to `path`, or to `out` when path is "-".
template<class Fn>
void
with_output(const std::string& path, std::ostream& out, Fn&& fn)
{
  if (path == "-") {
    fn(out);
    return;
  }
  std::ofstream file(path);
  if (!file)
    throw UsageError("cannot write '" + path + "'");
  fn(file);
  if (!file)
    throw UsageError("failed writing '" + path + "'");
}

struct SimulateOptions
{
  std::string density = "1";
  std::size_t n = 100;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::string estimators = "kde,jln_renorm,hg_raw,hobskde_raw,hobskde_renorm";
  std::string out = ".";
  std::size_t workers = 1;
  std::size_t coarse_points = 40;
  double rel_tol = 1e-3;
};

struct EstimateOptions
{
  std::string data;
  std::string kind = "kde";
  std::string h;
  std::string truth;
  std::string out = "-";
  std::optional<double> grid_lo;
  std::optional<double> grid_hi;
  std::size_t points = 1001;
};

struct TheoryOptions
{
  std::string density;
  std::string vehicle = "matched-normal";
  std::string h = "0.3";
  std::string which;
  std::size_t n = 100;
  std::string x;
  std::optional<double> x_lo;
  std::optional<double> x_hi;
  std::size_t points = 201;
  double step = 0.01;
  std::string out = "-";
};

struct TableOptions
{
  std::vector<std::string> summaries;
  std::string format = "markdown";
  std::string out = "-";
};

inline int
cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err)
{
  SimulationConfig cfg;
  cfg.density_id = mw_density_id(o.density);
  cfg.n = o.n;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  cfg.kinds = parse_kinds(o.estimators);
  cfg.workers = o.workers;
  cfg.search.coarse_points = o.coarse_points;
  cfg.search.rel_tol = o.rel_tol;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec)
    throw UsageError("cannot create output directory '" + o.out + "': " + ec.message());

  const auto result = run_simulation(cfg);
  const fs::path dir(o.out);
  with_output((dir / "replications.csv").string(), out,
              [&](std::ostream& os) { write_replications_csv(os, result.records); });
  with_output((dir / "summary.csv").string(), out,
              [&](std::ostream& os) { write_summary_csv(os, result.summary); });
  const std::string md = emit_table(result.summary, TableFormat::markdown);
  with_output((dir / "table.md").string(), out, [&](std::ostream& os) { os << md; });
  out << md;

  if (!result.valid) {
    err << "error: " << result.failures << " of " << cfg.reps * cfg.kinds.size()
        << " estimator fits failed (more than 1%); run marked invalid\n";
    return exit_invalid_run;
  }
  if (result.failures > 0)
    err << "warning: " << result.failures << " estimator fits failed\n";
  return exit_ok;
}

inline int
cmd_estimate(const EstimateOptions& o, std::ostream& out, std::ostream& err)
{
  const auto kind = kind_from_key(o.kind);
  if (!kind)
    throw UsageError("unknown estimator kind '" + o.kind + "'");
  const Sample s(read_data_file(o.data));

  double h = 0.0;
  if (detail::iequals(o.h, "oracle")) {
    if (o.truth.empty())
      throw UsageError("--h oracle requires --truth <density>");
    const auto r = oracle_bandwidth(*kind, s, mw_density(o.truth));
    h = r.h_star;
    err << "oracle bandwidth " << detail::format_double(h) << ", ISE "
        << detail::format_double(r.min_ise) << (r.boundary ? " (at search boundary)" : "")
        << '\n';
  } else {
    h = parse_numbers(o.h, "--h").front();
  }
  const Bandwidth bw(h);

  const double lo = o.grid_lo.value_or(s.min() - 8.0 * h);
  const double hi = o.grid_hi.value_or(s.max() + 8.0 * h);
  const EvaluationGrid grid(lo, hi, o.points);
  const auto est = estimate({ *kind, bw }, s, grid);
  with_output(o.out, out, [&](std::ostream& os) {
    os << "x,density\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      os << detail::format_double(grid[i]) << ',' << detail::format_double(est.values[i])
         << '\n';
  });
  return exit_ok;
}

inline int
cmd_theory(const TheoryOptions& o, std::ostream& out, std::ostream&)
{
  const auto f = mw_density(o.density);
  if (o.vehicle != "matched-normal")
    throw UsageError("unknown vehicle '" + o.vehicle + "'; only matched-normal is available");
  const std::vector<std::string> choices{ "bias2", "bias4", "hobskde", "hobskde-renorm",
                                          "variance" };
  if (std::find(choices.begin(), choices.end(), o.which) == choices.end())
    throw UsageError("unknown --which '" + o.which +
                     "'; expected bias2, bias4, hobskde, hobskde-renorm or variance");
  const auto hs = parse_numbers(o.h, "--h");
  for (double h : hs)
    if (!(h > 0.0) || !std::isfinite(h))
      throw UsageError("--h values must be positive");

  const ParametricFit f0 = moment_matched_normal(f);
  const RealFunction fr = f;
  const RealFunction f0r = f0;
  const auto grid = theory_grid(f, o.step);

  std::vector<double> xs;
  if (!o.x.empty()) {
    xs = parse_numbers(o.x, "--x");
  } else {
    const double lo = o.x_lo.value_or(f0.mu() - 4.0 * f0.sigma());
    const double hi = o.x_hi.value_or(f0.mu() + 4.0 * f0.sigma());
    const EvaluationGrid pts(lo, hi, o.points);
    xs = pts.points();
  }

  const double curvature =
    o.which == "hobskde-renorm" ? vehicle_curvature_integral(fr, f0r, grid) : 0.0;
  auto value = [&](double h, double x) {
    const Bandwidth bw(h);
    if (o.which == "bias2")
      return bias_expansion_term(fr, f0r, bw, x, 2, grid);
    if (o.which == "bias4")
      return bias_expansion_term(fr, f0r, bw, x, 4, grid);
    if (o.which == "hobskde")
      return hobskde_bias(fr, f0r, bw, x, grid);
    if (o.which == "hobskde-renorm")
      return hobskde_renorm_bias(fr, f0r, bw, x, grid, curvature);
    return asymptotic_variance(f(x), o.n, bw);
  };

  with_output(o.out, out, [&](std::ostream& os) {
    os << "h,x,value\n";
    for (double h : hs)
      for (double x : xs)
        os << detail::format_double(h) << ',' << detail::format_double(x) << ','
           << detail::format_double(value(h, x)) << '\n';
  });
  return exit_ok;
}

inline int
cmd_table(const TableOptions& o, std::ostream& out, std::ostream&)
{
  SummaryTable merged;
  for (const auto& path : o.summaries) {
    std::ifstream in(path);
    if (!in)
      throw UsageError("cannot read summary file '" + path + "'");
    SummaryTable t;
    try {
      t = read_summary_csv(in);
    } catch (const std::invalid_argument& e) {
      throw UsageError(path + ": " + e.what());
    }
    for (const auto& r : t.rows) {
      if (merged.find(r.density_id, r.n, r.kind))
        throw UsageError(path + ": duplicate row for " + std::string(mw_names[r.density_id - 1]) +
                         ", n=" + std::to_string(r.n) + ", " + std::string(kind_key(r.kind)));
      merged.rows.push_back(r);
    }
  }
  if (merged.rows.empty())
    throw UsageError("summary files contain no rows");
  const auto format = o.format == "csv" ? TableFormat::csv : TableFormat::markdown;
  with_output(o.out, out, [&](std::ostream& os) { os << emit_table(merged, format); });
  return exit_ok;
}

//! Parses argv and runs one subcommand. Output goes to `out` and
//! diagnostics to `err`, so tests can drive it in-process.
inline int
run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Multiplicative bias-corrected kernel density estimation toolkit", "mbkde" };
  // bandwidth is --h, so help is long-form only
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "Read options from a TOML/INI config file");
  app.require_subcommand(1);
  app.get_formatter()->column_width(36);

  SimulateOptions sim;
  sim.workers = default_workers();
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo oracle-ISE study on one density");
  simulate->add_option("--density", sim.density, "Density id 1-10 or its name")
    ->capture_default_str();
  simulate->add_option("--n", sim.n, "Sample size")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--reps", sim.reps, "Number of replications")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--estimators", sim.estimators, "Comma-separated estimator kinds, or all")
    ->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_option("--workers", sim.workers, "Worker threads (default: $MBKDE_WORKERS or cores)")
    ->check(CLI::PositiveNumber);
  simulate->add_option("--coarse-points", sim.coarse_points, "Bandwidths in the coarse search")
    ->check(CLI::Range(3, 100000))
    ->capture_default_str();
  simulate->add_option("--rel-tol", sim.rel_tol, "Relative tolerance of the refined bandwidth")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();

  EstimateOptions est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Apply one estimator to a data file");
  estimate_cmd->add_option("--data", est.data, "File with one observation per line")->required();
  estimate_cmd->add_option("--kind", est.kind, "Estimator kind")->capture_default_str();
  estimate_cmd->add_option("--h", est.h, "Bandwidth, or 'oracle' together with --truth")
    ->required();
  estimate_cmd->add_option("--truth", est.truth, "True density id or name, for --h oracle");
  estimate_cmd->add_option("--out", est.out, "Output CSV, - for stdout")->capture_default_str();
  estimate_cmd->add_option("--grid-lo", est.grid_lo, "Left end of the output grid");
  estimate_cmd->add_option("--grid-hi", est.grid_hi, "Right end of the output grid");
  estimate_cmd->add_option("--points", est.points, "Output grid points")
    ->check(CLI::Range(std::size_t{ 101 }, std::size_t{ 1 } << 24))
    ->capture_default_str();

  TheoryOptions th;
  auto* theory = app.add_subcommand("theory", "Asymptotic bias and variance curves");
  theory->add_option("--density", th.density, "Density id 1-10 or its name")->required();
  theory->add_option("--vehicle", th.vehicle, "Parametric vehicle")->capture_default_str();
  theory->add_option("--h", th.h, "Comma-separated bandwidths")->capture_default_str();
  theory->add_option("--which", th.which,
                     "bias2, bias4, hobskde, hobskde-renorm or variance")
    ->required();
  theory->add_option("--n", th.n, "Sample size for variance")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  theory->add_option("--x", th.x, "Comma-separated evaluation points");
  theory->add_option("--x-lo", th.x_lo, "Left end of the evaluation range");
  theory->add_option("--x-hi", th.x_hi, "Right end of the evaluation range");
  theory->add_option("--points", th.points, "Points in the evaluation range")
    ->check(CLI::Range(std::size_t{ 101 }, std::size_t{ 1 } << 20))
    ->capture_default_str();
  theory->add_option("--step", th.step, "Finite-difference step")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  theory->add_option("--out", th.out, "Output CSV, - for stdout")->capture_default_str();

  TableOptions tab;
  auto* table = app.add_subcommand("table", "Combine summary CSVs into one table");
  table->add_option("--summary", tab.summaries, "Summary CSV files")->required();
  table->add_option("--format", tab.format, "markdown or csv")
    ->check(CLI::IsMember({ "markdown", "csv" }))
    ->capture_default_str();
  table->add_option("--out", tab.out, "Output file, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return exit_ok;
    }
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return exit_usage;
  }

  try {
    if (*simulate)
      return cmd_simulate(sim, out, err);
    if (*estimate_cmd)
      return cmd_estimate(est, out, err);
    if (*theory)
      return cmd_theory(th, out, err);
    return cmd_table(tab, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return exit_usage;
}

} // namespace mbkde::cli
