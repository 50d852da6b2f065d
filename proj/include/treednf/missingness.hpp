#pragma once

// Synthetic MCAR missingness, quantile binarization and coverage
// experiments comparing the missing-data predictors.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treednf/boolean.hpp"
#include "treednf/tree.hpp"

namespace treednf {

enum class MissingMode { per_binary_feature, per_original_feature };

struct MissingnessConfig {
  double probability = 0.0;
  MissingMode mode = MissingMode::per_binary_feature;
  std::uint64_t seed = 0;
};

/// Masks each cell (or each original feature's bins jointly) with the given
/// probability. Cell (i, j) is masked iff stream_uniform(seed, i, j) < p,
/// where j is the binary column or the original feature index. Masks are
/// therefore nested in p for a fixed seed.
MaskedDataset inject_mcar(const Dataset& data, const MissingnessConfig& cfg);

struct NumericTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;
};

NumericTable parse_numeric_csv(const std::string& text);

struct BinarizeResult {
  Dataset data;
  /// Per original column, the thresholds actually emitted.
  std::vector<std::vector<double>> thresholds;
  std::vector<std::string> warnings;
};

/// Column j becomes binary columns "name<=t" for each distinct empirical
/// quantile t (linear interpolation) strictly below the column maximum.
/// Constant columns produce no bins and a warning.
BinarizeResult binarize_quantile(const NumericTable& raw, std::span<const double> quantiles);

enum class CoverageMethod { dnf, path, feature_complete };

struct CoverageRow {
  std::string method;
  double p = 0.0;
  double fraction_predicted = 0.0;
  std::optional<double> accuracy;
  double stderr_fraction = 0.0;
  std::optional<double> stderr_accuracy;
  std::size_t predicted = 0;  // summed over seeds
  std::size_t samples = 0;    // summed over seeds
};

/// One row per (method, p). Per-seed fractions and accuracies are averaged;
/// standard errors are std / sqrt(#seeds). Rows named "dnf/path" and
/// "dnf/feature_complete" carry per-seed averaged count ratios in
/// fraction_predicted.
struct CoverageReport {
  std::vector<CoverageRow> rows;

  const CoverageRow* find(const std::string& method, double p) const;
};

CoverageReport coverage_experiment(const DecisionTree& tree, const Dataset& data,
                                   std::span<const double> p_grid, MissingMode mode,
                                   std::span<const std::uint64_t> seeds,
                                   std::size_t max_vars = kDefaultMaxVars);

/// A sample counts as predicted when any tree's DNF prediction is defined;
/// the prediction comes from the lowest-objective such tree (lowest index on
/// ties). Rows are named "rashomon".
CoverageReport rashomon_coverage(std::span<const DecisionTree> trees,
                                 std::span<const double> objectives, const Dataset& data,
                                 std::span<const double> p_grid, MissingMode mode,
                                 std::span<const std::uint64_t> seeds,
                                 std::size_t max_vars = kDefaultMaxVars);

struct ExpectedCoverage {
  double dnf = 0.0;
  double path = 0.0;
  double feature_complete = 0.0;
};

/// Exact expected predicted fraction under independent per-binary-feature
/// masking with probability p, by enumerating every mask over the tree's
/// features.
ExpectedCoverage expected_coverage(const DecisionTree& tree, const Dataset& data, double p,
                                   std::size_t max_vars = kDefaultMaxVars);

std::string report_to_csv(const CoverageReport& report);

}  // namespace treednf
