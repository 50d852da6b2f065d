#include "treednf/missingness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "treednf/canonical.hpp"
#include "treednf/errors.hpp"
#include "treednf/predict.hpp"
#include "treednf/random.hpp"

namespace treednf {

namespace {

void check_probability(double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw SchemaError("missingness probability must lie in [0, 1]");
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Short rendering for column names; thresholds themselves keep full precision.
std::string format_threshold(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw SchemaError("cell \"" + cell + "\" on line " + std::to_string(line) +
                      " is not a finite number");
  }
  return v;
}

// Linear interpolation between order statistics at position (n - 1) q.
double empirical_quantile(const std::vector<double>& sorted, double q) {
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

// Mean and std / sqrt(k) with the population standard deviation.
Stats summarize(const std::vector<double>& values) {
  Stats s;
  s.count = values.size();
  if (values.empty()) return s;
  const double k = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stderr_ = std::sqrt(ss / k) / std::sqrt(k);
  return s;
}

struct SeedTally {
  std::size_t predicted = 0;
  std::size_t correct = 0;
};

// Per-seed tallies for one method at one p, reduced into a report row.
struct MethodAccumulator {
  std::vector<double> fractions;
  std::vector<double> accuracies;
  std::size_t predicted = 0;
  std::size_t samples = 0;

  void add(const SeedTally& t, std::size_t n) {
    fractions.push_back(static_cast<double>(t.predicted) / static_cast<double>(n));
    if (t.predicted > 0) {
      accuracies.push_back(static_cast<double>(t.correct) / static_cast<double>(t.predicted));
    }
    predicted += t.predicted;
    samples += n;
  }

  CoverageRow row(const std::string& method, double p) const {
    CoverageRow r;
    r.method = method;
    r.p = p;
    const Stats f = summarize(fractions);
    r.fraction_predicted = f.mean;
    r.stderr_fraction = f.stderr_;
    if (!accuracies.empty()) {
      const Stats a = summarize(accuracies);
      r.accuracy = a.mean;
      r.stderr_accuracy = a.stderr_;
    }
    r.predicted = predicted;
    r.samples = samples;
    return r;
  }
};

CoverageRow ratio_row(const std::string& method, double p, const std::vector<double>& ratios) {
  CoverageRow r;
  r.method = method;
  r.p = p;
  if (ratios.empty()) {
    r.fraction_predicted = std::numeric_limits<double>::quiet_NaN();
    r.stderr_fraction = std::numeric_limits<double>::quiet_NaN();
  } else {
    const Stats s = summarize(ratios);
    r.fraction_predicted = s.mean;
    r.stderr_fraction = s.stderr_;
  }
  return r;
}

void check_experiment_inputs(const Dataset& data, std::span<const double> p_grid,
                             std::span<const std::uint64_t> seeds) {
  data.validate();
  if (data.size() == 0) throw EmptyDataset("coverage experiment needs at least one sample");
  if (p_grid.empty()) throw SchemaError("probability grid is empty");
  if (seeds.empty()) throw SchemaError("at least one seed is required");
  for (double p : p_grid) check_probability(p);
}

void check_tree_matches(const DecisionTree& tree, const Dataset& data) {
  if (static_cast<std::size_t>(tree.dimension()) != data.dimension()) {
    throw DimensionMismatch("tree has dimension " + std::to_string(tree.dimension()) +
                            ", dataset has " + std::to_string(data.dimension()) + " columns");
  }
}

}  // namespace

MaskedDataset inject_mcar(const Dataset& data, const MissingnessConfig& cfg) {
  check_probability(cfg.probability);
  data.validate();
  if (cfg.mode == MissingMode::per_original_feature && !data.groups) {
    throw MissingGroupMap("per-original-feature masking needs a group map");
  }
  MaskedDataset out;
  out.feature_names = data.feature_names;
  out.labels = data.labels;
  out.rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    MaskedSample m = MaskedSample::from_complete(data.rows[i]);
    for (std::size_t j = 0; j < data.dimension(); ++j) {
      const std::uint64_t unit = cfg.mode == MissingMode::per_original_feature
                                     ? static_cast<std::uint64_t>((*data.groups)[j])
                                     : static_cast<std::uint64_t>(j);
      if (stream_uniform(cfg.seed, i, unit) < cfg.probability) m.set(static_cast<int>(j), Tri::na);
    }
    out.rows.push_back(std::move(m));
  }
  return out;
}

NumericTable parse_numeric_csv(const std::string& text) {
  const std::vector<std::string> lines = detail::csv_lines(text);
  if (lines.empty()) throw SchemaError("CSV has no header row");
  const std::vector<std::string> header = detail::split_csv_line(lines.front());
  auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw SchemaError("CSV has no \"label\" column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  NumericTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) table.names.push_back(header[c]);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = detail::split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw SchemaError("CSV line " + std::to_string(i + 1) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) {
        if (cells[c] != "0" && cells[c] != "1") {
          throw SchemaError("label on line " + std::to_string(i + 1) + " is not 0/1");
        }
        table.labels.push_back(cells[c] == "1" ? 1 : 0);
      } else {
        row.push_back(parse_number(cells[c], i + 1));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

BinarizeResult binarize_quantile(const NumericTable& raw, std::span<const double> quantiles) {
  if (quantiles.empty()) throw SchemaError("at least one quantile is required");
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    if (!(quantiles[k] > 0.0 && quantiles[k] < 1.0)) {
      throw SchemaError("quantiles must lie strictly between 0 and 1");
    }
    if (k > 0 && !(quantiles[k] > quantiles[k - 1])) {
      throw SchemaError("quantiles must be strictly increasing");
    }
  }
  if (raw.rows.empty()) throw EmptyDataset("numeric table has no rows");
  if (raw.labels.size() != raw.rows.size()) throw SchemaError("label count differs from row count");
  for (const auto& row : raw.rows) {
    if (row.size() != raw.names.size()) throw DimensionMismatch("numeric row has wrong width");
  }

  BinarizeResult result;
  Dataset& out = result.data;
  out.labels = raw.labels;
  out.rows.assign(raw.rows.size(), {});
  out.groups.emplace();
  out.group_names = raw.names;
  result.thresholds.resize(raw.names.size());

  for (std::size_t j = 0; j < raw.names.size(); ++j) {
    std::vector<double> column;
    for (const auto& row : raw.rows) column.push_back(row[j]);
    std::sort(column.begin(), column.end());
    if (column.front() == column.back()) {
      result.warnings.push_back("column \"" + raw.names[j] + "\" is constant; no bins emitted");
      continue;
    }
    for (double q : quantiles) {
      const double t = empirical_quantile(column, q);
      auto& kept = result.thresholds[j];
      if (t >= column.back()) {
        result.warnings.push_back("column \"" + raw.names[j] + "\": quantile " +
                                  format_number(q) + " equals the maximum; bin skipped");
        continue;
      }
      if (!kept.empty() && kept.back() == t) {
        result.warnings.push_back("column \"" + raw.names[j] + "\": quantile " +
                                  format_number(q) + " repeats threshold " +
                                  format_number(t) + "; bin skipped");
        continue;
      }
      kept.push_back(t);
      out.feature_names.push_back(raw.names[j] + "<=" + format_threshold(t));
      out.groups->push_back(static_cast<int>(j));
      for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        out.rows[i].push_back(raw.rows[i][j] <= t ? 1 : 0);
      }
    }
  }
  return result;
}

const CoverageRow* CoverageReport::find(const std::string& method, double p) const {
  for (const CoverageRow& r : rows) {
    if (r.method == method && r.p == p) return &r;
  }
  return nullptr;
}

CoverageReport coverage_experiment(const DecisionTree& tree, const Dataset& data,
                                   std::span<const double> p_grid, MissingMode mode,
                                   std::span<const std::uint64_t> seeds, std::size_t max_vars) {
  check_experiment_inputs(data, p_grid, seeds);
  check_tree_matches(tree, data);
  const CanonicalForm cf = to_dnf(tree, max_vars);
  const std::size_t n = data.size();

  CoverageReport report;
  for (double p : p_grid) {
    MethodAccumulator dnf, path, full;
    std::vector<double> over_path, over_full;
    for (std::uint64_t seed : seeds) {
      const MaskedDataset masked = inject_mcar(data, {p, mode, seed});
      SeedTally t_dnf, t_path, t_full;
      for (std::size_t i = 0; i < n; ++i) {
        const MaskedSample& m = masked.rows[i];
        const Prediction truth = from_label(data.labels[i]);
        auto tally = [&](SeedTally& t, Prediction pred) {
          if (pred == Prediction::na) return;
          ++t.predicted;
          if (pred == truth) ++t.correct;
        };
        tally(t_dnf, predict_dnf(cf, m, max_vars));
        tally(t_path, predict_path(tree, m));
        tally(t_full, predict_feature_complete(tree, m));
      }
      dnf.add(t_dnf, n);
      path.add(t_path, n);
      full.add(t_full, n);
      if (t_path.predicted > 0) {
        over_path.push_back(static_cast<double>(t_dnf.predicted) /
                            static_cast<double>(t_path.predicted));
      }
      if (t_full.predicted > 0) {
        over_full.push_back(static_cast<double>(t_dnf.predicted) /
                            static_cast<double>(t_full.predicted));
      }
    }
    report.rows.push_back(dnf.row("dnf", p));
    report.rows.push_back(path.row("path", p));
    report.rows.push_back(full.row("feature_complete", p));
    report.rows.push_back(ratio_row("dnf/path", p, over_path));
    report.rows.push_back(ratio_row("dnf/feature_complete", p, over_full));
  }
  return report;
}

CoverageReport rashomon_coverage(std::span<const DecisionTree> trees,
                                 std::span<const double> objectives, const Dataset& data,
                                 std::span<const double> p_grid, MissingMode mode,
                                 std::span<const std::uint64_t> seeds, std::size_t max_vars) {
  if (trees.empty()) throw SchemaError("tree set is empty");
  if (objectives.size() != trees.size()) {
    throw SchemaError("need one objective per tree");
  }
  check_experiment_inputs(data, p_grid, seeds);
  std::vector<CanonicalForm> forms;
  for (const DecisionTree& t : trees) {
    check_tree_matches(t, data);
    forms.push_back(to_dnf(t, max_vars));
  }
  std::vector<std::size_t> order(trees.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return objectives[a] < objectives[b]; });

  CoverageReport report;
  for (double p : p_grid) {
    MethodAccumulator acc;
    for (std::uint64_t seed : seeds) {
      const MaskedDataset masked = inject_mcar(data, {p, mode, seed});
      SeedTally tally;
      for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t k : order) {
          const Prediction pred = predict_dnf(forms[k], masked.rows[i], max_vars);
          if (pred == Prediction::na) continue;
          ++tally.predicted;
          if (pred == from_label(data.labels[i])) ++tally.correct;
          break;
        }
      }
      acc.add(tally, data.size());
    }
    report.rows.push_back(acc.row("rashomon", p));
  }
  return report;
}

ExpectedCoverage expected_coverage(const DecisionTree& tree, const Dataset& data, double p,
                                   std::size_t max_vars) {
  check_probability(p);
  data.validate();
  if (data.size() == 0) throw EmptyDataset("coverage needs at least one sample");
  check_tree_matches(tree, data);
  const std::vector<int>& used = tree.used_features();
  if (used.size() > max_vars) throw VariableCapExceeded(used.size(), max_vars);
  const CanonicalForm cf = to_dnf(tree, max_vars);

  ExpectedCoverage out;
  const std::size_t k = used.size();
  const double n = static_cast<double>(data.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    const int hidden = std::popcount(mask);
    const double weight =
        std::pow(p, hidden) * std::pow(1.0 - p, static_cast<int>(k) - hidden);
    if (weight == 0.0) continue;
    for (const auto& row : data.rows) {
      MaskedSample m = MaskedSample::from_complete(row);
      for (std::size_t b = 0; b < k; ++b) {
        if (mask >> b & 1U) m.set(used[b], Tri::na);
      }
      if (predict_dnf(cf, m, max_vars) != Prediction::na) out.dnf += weight / n;
      if (predict_path(tree, m) != Prediction::na) out.path += weight / n;
      if (predict_feature_complete(tree, m) != Prediction::na) out.feature_complete += weight / n;
    }
  }
  return out;
}

std::string report_to_csv(const CoverageReport& report) {
  std::ostringstream out;
  out << "method,p,fraction_predicted,accuracy,stderr_fraction,stderr_accuracy\n";
  for (const CoverageRow& r : report.rows) {
    out << r.method << ',' << format_number(r.p) << ',' << format_number(r.fraction_predicted)
        << ',' << (r.accuracy ? format_number(*r.accuracy) : "NA") << ','
        << format_number(r.stderr_fraction) << ','
        << (r.stderr_accuracy ? format_number(*r.stderr_accuracy) : "NA") << '\n';
  }
  return out.str();
}

}  // namespace treednf
