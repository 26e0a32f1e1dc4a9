#pragma once

#include "densities.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "metrics.hpp"
#include "random.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mbkde {

struct SimulationConfig
{
  int density_id = 1;
  std::size_t n = 100;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::vector<EstimatorKind> kinds{ table_kinds.begin(), table_kinds.end() };
  BandwidthSearch search{};
  std::size_t workers = 1;
};

struct KindOutcome
{
  EstimatorKind kind;
  std::optional<OracleResult> result;
  std::string error;
};

struct ReplicationRecord
{
  std::size_t rep = 0;
  std::uint64_t sample_hash = 0;
  std::vector<KindOutcome> outcomes;
};

struct SummaryRow
{
  int density_id = 1;
  std::size_t n = 0;
  EstimatorKind kind = EstimatorKind::kde;
  //! Replications that produced a result.
  std::size_t reps = 0;
  std::size_t failures = 0;
  double mean_e5 = 0.0;
  //! Standard error of the mean, NaN with fewer than two replications.
  double se_e5 = std::numeric_limits<double>::quiet_NaN();
};

struct SummaryTable
{
  std::vector<SummaryRow> rows;

  const SummaryRow* find(int density_id, std::size_t n, EstimatorKind kind) const
  {
    for (const auto& r : rows)
      if (r.density_id == density_id && r.n == n && r.kind == kind)
        return &r;
    return nullptr;
  }
};

struct SimulationResult
{
  SummaryTable summary;
  std::vector<ReplicationRecord> records;
  std::size_t failures = 0;
  //! False when more than 1% of (replication, kind) cells failed.
  bool valid = true;
};

//! One replication: a single sample shared by every requested estimator.
inline ReplicationRecord
run_replication(const SimulationConfig& cfg, const NormalMixture& truth, std::size_t rep)
{
  auto rng = RandomStream::split(cfg.seed, rep);
  const Sample sample(mixture_sample(truth, cfg.n, rng));
  ReplicationRecord rec;
  rec.rep = rep;
  rec.sample_hash = sample.hash();
  rec.outcomes.reserve(cfg.kinds.size());
  for (auto kind : cfg.kinds) {
    KindOutcome out{ kind, std::nullopt, {} };
    try {
      out.result = oracle_bandwidth(kind, sample, truth, cfg.search);
    } catch (const Error& e) {
      out.error = e.what();
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

//! Aggregate replication records in index order.
inline SummaryTable
summarise(int density_id,
          std::size_t n,
          const std::vector<EstimatorKind>& kinds,
          const std::vector<ReplicationRecord>& records)
{
  SummaryTable table;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    SummaryRow row;
    row.density_id = density_id;
    row.n = n;
    row.kind = kinds[k];
    double sum = 0.0;
    for (const auto& rec : records) {
      const auto& o = rec.outcomes[k];
      if (o.result) {
        sum += o.result->min_ise;
        ++row.reps;
      } else {
        ++row.failures;
      }
    }
    if (row.reps > 0) {
      const double mean = sum / static_cast<double>(row.reps);
      row.mean_e5 = mean * 1e5;
      if (row.reps >= 2) {
        double ss = 0.0;
        for (const auto& rec : records)
          if (const auto& o = rec.outcomes[k]; o.result) {
            const double d = o.result->min_ise - mean;
            ss += d * d;
          }
        const double sd = std::sqrt(ss / static_cast<double>(row.reps - 1));
        row.se_e5 = sd / std::sqrt(static_cast<double>(row.reps)) * 1e5;
      }
    } else {
      row.mean_e5 = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(row);
  }
  return table;
}

//! Monte Carlo oracle-ISE study. Replication r draws from stream (seed, r),
//! so results do not depend on the number of workers.
inline SimulationResult
run_simulation(const SimulationConfig& cfg)
{
  if (cfg.reps == 0)
    throw DomainError("simulation needs at least one replication");
  if (cfg.kinds.empty())
    throw DomainError("simulation needs at least one estimator kind");
  if (cfg.n == 0)
    throw EmptySampleError("simulation sample size must be positive");
  const NormalMixture truth = mw_density(cfg.density_id);

  SimulationResult result;
  result.records.resize(cfg.reps);
  std::atomic<std::size_t> next{ 0 };
  auto work = [&] {
    for (std::size_t r = next++; r < cfg.reps; r = next++)
      result.records[r] = run_replication(cfg, truth, r);
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, cfg.reps);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }

  result.summary = summarise(cfg.density_id, cfg.n, cfg.kinds, result.records);
  for (const auto& row : result.summary.rows)
    result.failures += row.failures;
  const double cells = static_cast<double>(cfg.reps * cfg.kinds.size());
  result.valid = static_cast<double>(result.failures) <= 0.01 * cells;
  return result;
}

// ---------------------------------------------------------------------------
// Text output

namespace detail {

inline std::string
format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string>
split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

inline double
parse_double(const std::string& s)
{
  if (s == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size())
    throw std::invalid_argument("not a number: " + s);
  return v;
}

} // namespace detail

inline constexpr std::string_view replication_csv_header =
  "rep,kind,h_star,min_ise,sample_hash";
inline constexpr std::string_view summary_csv_header =
  "density,n,kind,reps,mean_min_ise_e5,se_e5";

//! One row per (replication, kind); failed cells carry nan.
inline void
write_replications_csv(std::ostream& os, const std::vector<ReplicationRecord>& records)
{
  os << replication_csv_header << '\n';
  for (const auto& rec : records)
    for (const auto& o : rec.outcomes) {
      os << rec.rep << ',' << kind_key(o.kind) << ',';
      if (o.result)
        os << detail::format_double(o.result->h_star) << ','
           << detail::format_double(o.result->min_ise);
      else
        os << "nan,nan";
      os << ',' << rec.sample_hash << '\n';
    }
}

inline void
write_summary_csv(std::ostream& os, const SummaryTable& t)
{
  os << summary_csv_header << '\n';
  for (const auto& r : t.rows) {
    const auto label = mw_names[r.density_id - 1];
    os << label << ',' << r.n << ',' << kind_key(r.kind) << ',' << r.reps << ','
       << detail::format_double(r.mean_e5) << ',' << detail::format_double(r.se_e5)
       << '\n';
  }
}

inline SummaryTable
read_summary_csv(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line) || detail::split_csv_line(line) !=
                                   detail::split_csv_line(std::string(summary_csv_header)))
    throw std::invalid_argument("summary CSV header mismatch");
  SummaryTable t;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 6)
      throw std::invalid_argument("summary CSV row needs 6 fields: " + line);
    SummaryRow r;
    r.density_id = mw_density_id(cells[0]);
    r.n = std::stoul(cells[1]);
    const auto kind = kind_from_key(cells[2]);
    if (!kind)
      throw std::invalid_argument("unknown estimator kind: " + cells[2]);
    r.kind = *kind;
    r.reps = std::stoul(cells[3]);
    r.mean_e5 = detail::parse_double(cells[4]);
    r.se_e5 = detail::parse_double(cells[5]);
    t.rows.push_back(r);
  }
  return t;
}

//! "mean (se)" rounded to integers; "mean (n/a)" without a standard error.
inline std::string
format_cell(double mean_e5, double se_e5)
{
  std::ostringstream os;
  os << std::llround(mean_e5) << " (";
  if (std::isnan(se_e5))
    os << "n/a";
  else
    os << std::llround(se_e5);
  os << ')';
  return os.str();
}

enum class TableFormat
{
  csv,
  markdown
};

//! Summary as CSV, or as a markdown block per density with one column per
//! sample size (values "mean (se)" in units of 1e-5).
inline std::string
emit_table(const SummaryTable& t, TableFormat format)
{
  if (t.rows.empty())
    throw std::invalid_argument("cannot emit an empty summary table");
  std::ostringstream os;
  if (format == TableFormat::csv) {
    write_summary_csv(os, t);
    return os.str();
  }

  std::vector<std::size_t> ns;
  std::vector<int> densities;
  std::vector<EstimatorKind> kinds;
  for (const auto& r : t.rows) {
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end())
      ns.push_back(r.n);
    if (std::find(densities.begin(), densities.end(), r.density_id) == densities.end())
      densities.push_back(r.density_id);
    if (std::find(kinds.begin(), kinds.end(), r.kind) == kinds.end())
      kinds.push_back(r.kind);
  }
  std::sort(ns.begin(), ns.end());
  std::sort(densities.begin(), densities.end());
  auto order = [](EstimatorKind k) {
    const auto it = std::find(table_kinds.begin(), table_kinds.end(), k);
    return it != table_kinds.end()
             ? static_cast<int>(it - table_kinds.begin())
             : 100 + static_cast<int>(k);
  };
  std::stable_sort(kinds.begin(), kinds.end(),
                   [&](auto a, auto b) { return order(a) < order(b); });

  os << "| Density | Estimator |";
  for (auto n : ns)
    os << " n=" << n << " |";
  os << "\n|---|---|";
  for (std::size_t i = 0; i < ns.size(); ++i)
    os << "---|";
  os << '\n';
  for (int d : densities) {
    bool first = true;
    for (auto k : kinds) {
      bool any = false;
      for (auto n : ns)
        any = any || t.find(d, n, k) != nullptr;
      if (!any)
        continue;
      os << "| " << (first ? std::string(mw_names[d - 1]) : std::string()) << " | "
         << kind_symbol(k) << " |";
      for (auto n : ns) {
        const auto* r = t.find(d, n, k);
        os << ' ' << (r ? format_cell(r->mean_e5, r->se_e5) : std::string("–")) << " |";
      }
      os << '\n';
      first = false;
    }
  }
  return os.str();
}

} // namespace mbkde
