#include "treednf/cli.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "treednf/canonical.hpp"
#include "treednf/cost.hpp"
#include "treednf/errors.hpp"
#include "treednf/missingness.hpp"
#include "treednf/predict.hpp"
#include "treednf/rashomon.hpp"

namespace treednf::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

/// Inconsistent or missing flags that CLI11 cannot detect on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw UsageError(what + ": \"" + text + "\" is not a number");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

/// "a:b:step" (inclusive, rounded to 12 decimals) or "p1,p2,...".
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  const std::vector<std::string> range = split_list(text, ':');
  if (range.size() == 3) {
    const double lo = parse_double(range[0], "--p-grid");
    const double hi = parse_double(range[1], "--p-grid");
    const double step = parse_double(range[2], "--p-grid");
    if (step <= 0.0 || hi < lo) throw UsageError("--p-grid needs lo <= hi and a positive step");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      grid.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
  } else if (range.size() == 1) {
    for (const std::string& p : split_list(text, ',')) grid.push_back(parse_double(p, "--p-grid"));
  } else {
    throw UsageError("--p-grid must be lo:hi:step or a comma-separated list");
  }
  if (grid.empty()) throw UsageError("--p-grid is empty");
  return grid;
}

json parse_json_text(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": invalid JSON (" + e.what() + ")");
  }
}

json terms_json(const Dnf& d) {
  json out = json::array();
  for (const Term& t : d.terms()) out.push_back(t.to_string());
  return out;
}

/// State shared by one invocation: global flags, recorded inputs, outputs
/// and seeds for the manifest.
struct Session {
  Session(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
  std::size_t max_vars = kDefaultMaxVars;
  std::string manifest_out;
  std::string subcommand;
  json flags = json::object();
  json seeds = json::object();
  json notes = json::object();
  json inputs = json::array();
  json outputs = json::array();

  std::string read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path);
    std::string text = buf.str();
    inputs.push_back({{"path", path}, {"sha256", sha256_hex(text)}});
    return text;
  }

  void write(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
      out << content;
      out.flush();
    } else {
      write_atomic(path, content);
    }
    outputs.push_back({{"path", path.empty() ? "-" : path}, {"sha256", sha256_hex(content)}});
  }

  static void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw IoError("cannot write " + tmp);
      f << content;
      f.flush();
      if (!f) throw IoError("error while writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw IoError("cannot move output into place at " + path);
    }
  }

  void say(const std::string& line) const {
    if (!quiet) err << line << '\n';
  }

  void warn(const std::string& line) const { err << "warning: " << line << '\n'; }

  std::uint64_t seed(const std::string& name, const std::optional<std::uint64_t>& given) {
    std::uint64_t value = 0;
    if (given) {
      value = *given;
    } else {
      std::random_device device;
      value = (static_cast<std::uint64_t>(device()) << 32) ^ device();
    }
    seeds[name] = {{"value", value}, {"source", given ? "flag" : "auto"}};
    return value;
  }

  void write_manifest() const {
    if (manifest_out.empty()) return;
    const json manifest = {{"tool", "treednf"},        {"version", kVersion},
                           {"subcommand", subcommand}, {"flags", flags},
                           {"seeds", seeds},           {"notes", notes},
                           {"inputs", inputs},         {"outputs", outputs}};
    write_atomic(manifest_out, manifest.dump(2) + "\n");
  }

  DecisionTree tree(const std::string& path) {
    return parse_tree(parse_json_text(read(path), path));
  }

  Dataset dataset(const std::string& path, const std::string& group_map) {
    Dataset d = parse_dataset_csv(read(path));
    if (!group_map.empty()) attach_group_map(d, parse_json_text(read(group_map), group_map));
    d.validate();
    return d;
  }

  TreeSet tree_set(const std::string& path) { return parse_tree_set(parse_json_text(read(path), path)); }
};

void record_flags(const CLI::App& app, json& flags) {
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "version") continue;
    const std::vector<std::string>& res = opt->results();
    if (res.empty()) {
      const std::string def = opt->get_default_str();
      if (!def.empty()) flags[name] = def;
    } else if (res.size() == 1) {
      flags[name] = res.front();
    } else {
      flags[name] = res;
    }
  }
}

// ---------------------------------------------------------------- commands

struct CanonicalizeArgs {
  std::string tree, out;
  bool no_bcf = false;
};

void run_canonicalize(Session& s, const CanonicalizeArgs& a) {
  const DecisionTree tree = s.tree(a.tree);
  CanonicalForm cf = to_dnf(tree, s.max_vars);
  if (!a.no_bcf) cf = attach_bcf(std::move(cf), s.max_vars);
  json doc = {{"dimension", cf.dimension},
              {"feature_names", tree.feature_names()},
              {"key", canonical_key(cf)},
              {"simple_pos", terms_json(cf.simple_pos)},
              {"simple_neg", terms_json(cf.simple_neg)}};
  if (cf.has_bcf()) {
    doc["bcf_pos"] = terms_json(*cf.bcf_pos);
    doc["bcf_neg"] = terms_json(*cf.bcf_neg);
  }
  s.write(a.out, doc.dump(2) + "\n");
  s.say("key: " + canonical_key(cf));
}

struct EquivArgs {
  std::string a, b, out;
};

void run_equiv(Session& s, const EquivArgs& a) {
  const CanonicalForm x = to_dnf(s.tree(a.a), s.max_vars);
  const CanonicalForm y = to_dnf(s.tree(a.b), s.max_vars);
  const bool same = equivalent(x, y);
  s.write(a.out, same ? "equivalent\n" : "not equivalent\n");
  s.say(canonical_key(x) + (same ? " == " : " != ") + canonical_key(y));
}

struct DedupArgs {
  std::string trees, out;
};

void run_dedup(Session& s, const DedupArgs& a) {
  const TreeSet ts = s.tree_set(a.trees);
  const std::size_t nontrivial = remove_trivial(ts).size();
  const DedupResult r = dedup(ts, s.max_vars);
  s.write(a.out, dedup_to_json(r, nontrivial).dump(2) + "\n");
  for (std::size_t i : r.over_cap) s.warn("tree " + std::to_string(i) + " exceeds --max-vars; skipped");
  s.say("total " + std::to_string(r.total) + ", nontrivial " + std::to_string(nontrivial) +
        ", unique " + std::to_string(r.classes.size()));
}

struct PredictArgs {
  std::string tree, data, out, method = "all";
};

void run_predict(Session& s, const PredictArgs& a) {
  const DecisionTree tree = s.tree(a.tree);
  const MaskedDataset data = parse_masked_csv(s.read(a.data));
  if (data.dimension() != static_cast<std::size_t>(tree.dimension())) {
    throw DimensionMismatch("data has " + std::to_string(data.dimension()) + " feature columns, tree has " +
                            std::to_string(tree.dimension()));
  }
  std::vector<std::string> methods;
  if (a.method == "all") {
    methods = {"dnf", "path", "feature_complete"};
  } else {
    methods = {a.method};
  }
  const CanonicalForm cf = to_dnf(tree, s.max_vars);
  std::map<std::string, std::function<Prediction(const MaskedSample&)>> run = {
      {"dnf", [&](const MaskedSample& m) { return predict_dnf(cf, m, s.max_vars); }},
      {"fast", [&](const MaskedSample& m) { return predict_missing_fast(tree, m); }},
      {"path", [&](const MaskedSample& m) { return predict_path(tree, m); }},
      {"feature_complete", [&](const MaskedSample& m) { return predict_feature_complete(tree, m); }}};

  std::ostringstream csv;
  csv << "row";
  for (const auto& m : methods) csv << ',' << m;
  csv << ",label\n";
  std::map<std::string, std::size_t> predicted;
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv << i;
    for (const auto& m : methods) {
      const Prediction p = run.at(m)(data.rows[i]);
      predicted[m] += p != Prediction::na;
      csv << ',' << to_string(p);
    }
    csv << ',' << int{data.labels[i]} << '\n';
  }
  s.write(a.out, csv.str());
  for (const auto& m : methods) {
    s.say(m + ": predicted " + std::to_string(predicted[m]) + " of " + std::to_string(data.size()));
  }
}

struct MissingArgs {
  std::string tree, trees, data, group_map, out, grid = "0.1:0.9:0.1", mode = "per-binary";
  std::size_t seeds = 5;
  std::optional<std::uint64_t> seed;
};

void run_missing(Session& s, const MissingArgs& a) {
  if (a.tree.empty() == a.trees.empty()) throw UsageError("give exactly one of --tree and --trees");
  const MissingMode mode =
      a.mode == "per-original" ? MissingMode::per_original_feature : MissingMode::per_binary_feature;
  if (a.seeds == 0) throw UsageError("--seeds must be positive");
  const Dataset data = s.dataset(a.data, a.group_map);
  const std::vector<double> grid = parse_grid(a.grid);
  const std::uint64_t base = s.seed("mcar", a.seed);
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < a.seeds; ++k) seeds.push_back(base + k);
  s.seeds["mcar"]["derived"] = seeds;
  s.notes["aggregation"] =
      "fractions, accuracies and dnf ratios are per-seed values averaged over seeds; "
      "stderr is the population standard deviation over seeds divided by sqrt(seeds)";

  CoverageReport report;
  if (!a.tree.empty()) {
    report = coverage_experiment(s.tree(a.tree), data, grid, mode, seeds, s.max_vars);
  } else {
    const TreeSet ts = s.tree_set(a.trees);
    report = rashomon_coverage(ts.trees, ts.objectives, data, grid, mode, seeds, s.max_vars);
  }
  s.write(a.out, report_to_csv(report));
  for (const CoverageRow& r : report.rows) {
    if (r.method.find('/') != std::string::npos) continue;
    s.say(r.method + " p=" + format_number(r.p) + ": predicted " + format_number(r.fraction_predicted));
  }
}

struct CostArgs {
  std::string tree, data, group_map, costs, costs_out, policy, out, bonus_scope = "tree";
  std::optional<std::uint64_t> random_costs_seed;
  std::optional<std::uint64_t> seed;
  QHyperparams hp;
  std::string kinds;
};

AcquisitionEnv make_env(Session& s, const CostArgs& a, const DecisionTree& tree, const Dataset& data) {
  if (a.costs.empty() == !a.random_costs_seed.has_value()) {
    throw UsageError("give exactly one of --costs and --random-costs");
  }
  CostModel cm;
  if (a.random_costs_seed) {
    s.seeds["costs"] = {{"value", *a.random_costs_seed}, {"source", "flag"}};
    cm = random_costs(data, *a.random_costs_seed);
  } else {
    cm = cost_model_from_json(parse_json_text(s.read(a.costs), a.costs), data);
  }
  if (!a.costs_out.empty()) s.write(a.costs_out, cost_model_to_json(cm).dump(2) + "\n");
  const BonusScope scope = a.bonus_scope == "all" ? BonusScope::all_features : BonusScope::tree_features;
  return AcquisitionEnv(tree, attach_bcf(to_dnf(tree, s.max_vars), s.max_vars), std::move(cm), scope);
}

void run_cost_train(Session& s, const CostArgs& a) {
  const DecisionTree tree = s.tree(a.tree);
  const Dataset data = s.dataset(a.data, a.group_map);
  const AcquisitionEnv env = make_env(s, a, tree, data);
  const std::uint64_t seed = s.seed("episodes", a.seed);
  const QPolicy policy = train_q(env, data, a.hp, seed);
  s.write(a.out, policy_to_json(policy).dump(2) + "\n");
  s.say("trained " + std::to_string(a.hp.episodes) + " episodes; " +
        std::to_string(policy.table.size()) + " states visited");
}

void run_cost_eval(Session& s, const CostArgs& a) {
  const DecisionTree tree = s.tree(a.tree);
  const Dataset data = s.dataset(a.data, a.group_map);
  const AcquisitionEnv env = make_env(s, a, tree, data);
  std::optional<QPolicy> policy;
  if (!a.policy.empty()) policy = policy_from_json(parse_json_text(s.read(a.policy), a.policy));
  if (policy && policy->dimension != tree.dimension()) {
    throw DimensionMismatch("policy dimension differs from the tree dimension");
  }
  std::vector<PolicyKind> kinds;
  if (a.kinds.empty()) {
    kinds = {PolicyKind::naive, PolicyKind::path, PolicyKind::greedy};
    if (policy) kinds.push_back(PolicyKind::optimized);
  } else {
    for (const std::string& k : split_list(a.kinds, ',')) kinds.push_back(policy_kind_from_string(k));
  }
  std::ostringstream csv;
  csv << "policy_kind,mean_cost,std_cost,n_rows\n";
  for (PolicyKind k : kinds) {
    if (k == PolicyKind::optimized && !policy) throw UsageError("the optimized policy needs --policy");
    const PolicyEvaluation e = evaluate_policy(k, env, policy ? &*policy : nullptr, data);
    csv << to_string(k) << ',' << format_number(e.mean_cost) << ',' << format_number(e.std_cost) << ','
        << e.rows << '\n';
    s.say(std::string(to_string(k)) + ": mean cost " + format_number(e.mean_cost));
  }
  s.write(a.out, csv.str());
}

struct ImportanceArgs {
  std::string trees, tree, data, group_map, out, compare, wasserstein_out;
  bool dedup = false;
  std::size_t repeats = 1;
  std::optional<std::uint64_t> seed;
};

std::map<std::string, WeightedValues> parse_importance_csv(const std::string& text) {
  const std::vector<std::string> lines = detail::csv_lines(text);
  if (lines.empty() || detail::split_csv_line(lines.front()) != std::vector<std::string>{"feature", "value", "weight"}) {
    throw SchemaError("importance CSV must have the header feature,value,weight");
  }
  std::map<std::string, WeightedValues> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = detail::split_csv_line(lines[i]);
    if (cells.size() != 3) throw SchemaError("importance CSV line " + std::to_string(i + 1) + " needs 3 cells");
    try {
      out[cells[0]].emplace_back(parse_double(cells[1], "value"), parse_double(cells[2], "weight"));
    } catch (const UsageError& e) {
      throw SchemaError(e.what());
    }
  }
  return out;
}

void run_importance(Session& s, const ImportanceArgs& a) {
  if (a.tree.empty() == a.trees.empty()) throw UsageError("give exactly one of --trees and --tree");
  const Dataset data = s.dataset(a.data, a.group_map);
  std::ostringstream csv;
  if (!a.tree.empty()) {
    if (!a.compare.empty()) throw UsageError("--compare applies to --trees distributions only");
    const std::uint64_t seed = s.seed("permutation", a.seed);
    const std::vector<double> imp = permutation_importance(s.tree(a.tree), data, seed, a.repeats);
    csv << "feature,importance\n";
    for (std::size_t j = 0; j < imp.size(); ++j) csv << data.feature_names[j] << ',' << format_number(imp[j]) << '\n';
    s.write(a.out, csv.str());
    s.say("permutation importance over " + std::to_string(a.repeats) + " repeats");
    return;
  }
  const TreeSet ts = s.tree_set(a.trees);
  const ImportanceDistribution dist = importance_distribution(ts, data, a.dedup, s.max_vars);
  csv << "feature,value,weight\n";
  for (std::size_t j = 0; j < dist.features.size(); ++j) {
    for (const auto& [value, weight] : dist.features[j]) {
      csv << dist.feature_names[j] << ',' << format_number(value) << ',' << format_number(weight) << '\n';
    }
  }
  s.write(a.out, csv.str());
  s.say(std::to_string(ts.size()) + " trees" + (a.dedup ? ", deduplicated" : ""));

  if (a.compare.empty()) {
    if (!a.wasserstein_out.empty()) throw UsageError("--wasserstein-out needs --compare");
    return;
  }
  const std::map<std::string, WeightedValues> other = parse_importance_csv(s.read(a.compare));
  std::ostringstream w;
  w << "feature,wasserstein_1\n";
  for (std::size_t j = 0; j < dist.features.size(); ++j) {
    auto it = other.find(dist.feature_names[j]);
    if (it == other.end()) throw SchemaError("feature \"" + dist.feature_names[j] + "\" missing from " + a.compare);
    w << dist.feature_names[j] << ',' << format_number(wasserstein_1(dist.features[j], it->second)) << '\n';
  }
  s.write(a.wasserstein_out, w.str());
}

struct BinarizeArgs {
  std::string data, out, group_map_out, quantiles = "0.33,0.66";
};

void run_binarize(Session& s, const BinarizeArgs& a) {
  const NumericTable raw = parse_numeric_csv(s.read(a.data));
  std::vector<double> q;
  for (const std::string& p : split_list(a.quantiles, ',')) q.push_back(parse_double(p, "--quantiles"));
  const BinarizeResult r = binarize_quantile(raw, q);
  for (const std::string& w : r.warnings) s.warn(w);
  s.write(a.out, dataset_to_csv(r.data));
  if (!a.group_map_out.empty()) s.write(a.group_map_out, group_map_to_json(r.data).dump(2) + "\n");
  s.say(std::to_string(raw.names.size()) + " columns -> " + std::to_string(r.data.dimension()) + " bins");
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw InternalError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Canonical DNF tools for binary decision trees", "treednf"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->always_capture_default();

  Session s{out, err};
  app.add_option("--max-vars", s.max_vars, "Variable cap for exact minimization")->check(CLI::Range(1, 30));
  app.add_flag("--quiet", s.quiet, "Suppress the summary on standard error");
  app.add_option("--manifest-out", s.manifest_out, "Write a run manifest (JSON) to this path");

  const std::vector<std::string> modes{"per-binary", "per-original"};
  std::function<void()> action;

  CanonicalizeArgs canon;
  auto* c = app.add_subcommand("canonicalize", "Minimal DNFs and Blake canonical forms of a tree");
  c->add_option("tree", canon.tree, "Tree JSON")->required();
  c->add_flag("--no-bcf", canon.no_bcf, "Skip the Blake canonical forms");
  c->add_option("--out", canon.out, "Output path (default: standard output)");
  c->callback([&] { action = [&] { run_canonicalize(s, canon); }; });

  EquivArgs eq;
  auto* e = app.add_subcommand("equiv", "Decide predictive equivalence of two trees");
  e->add_option("a", eq.a, "First tree JSON")->required();
  e->add_option("b", eq.b, "Second tree JSON")->required();
  e->add_option("--out", eq.out, "Output path (default: standard output)");
  e->callback([&] { action = [&] { run_equiv(s, eq); }; });

  DedupArgs dd;
  auto* d = app.add_subcommand("dedup", "Group a tree set into predictive-equivalence classes");
  d->add_option("trees", dd.trees, "JSON array of tree documents")->required();
  d->add_option("--out", dd.out, "Output path (default: standard output)");
  d->callback([&] { action = [&] { run_dedup(s, dd); }; });

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Predict rows with missing values");
  p->add_option("--tree", pr.tree, "Tree JSON")->required();
  p->add_option("--data", pr.data, "CSV with 0/1/NA cells and a label column")->required();
  p->add_option("--method", pr.method, "Prediction method")
      ->check(CLI::IsMember({"all", "dnf", "fast", "path", "feature_complete"}));
  p->add_option("--out", pr.out, "Output CSV (default: standard output)");
  p->callback([&] { action = [&] { run_predict(s, pr); }; });

  MissingArgs ms;
  auto* m = app.add_subcommand("missing-sim", "Coverage under synthetic MCAR missingness");
  m->add_option("--tree", ms.tree, "Tree JSON");
  m->add_option("--trees", ms.trees, "Tree set JSON with objectives");
  m->add_option("--data", ms.data, "Complete binary CSV")->required();
  m->add_option("--group-map", ms.group_map, "Binary column -> original feature JSON");
  m->add_option("--p-grid", ms.grid, "lo:hi:step or comma list of probabilities");
  m->add_option("--mode", ms.mode, "Masking unit")->check(CLI::IsMember(modes));
  m->add_option("--seeds", ms.seeds, "Number of seeds");
  m->add_option("--seed", ms.seed, "Base seed (recorded in the manifest when omitted)");
  m->add_option("--out", ms.out, "Report CSV (default: standard output)");
  m->callback([&] { action = [&] { run_missing(s, ms); }; });

  CostArgs train;
  auto add_cost_flags = [](CLI::App* sub, CostArgs& a) {
    sub->add_option("--tree", a.tree, "Tree JSON")->required();
    sub->add_option("--data", a.data, "Complete binary CSV")->required();
    sub->add_option("--group-map", a.group_map, "Binary column -> original feature JSON");
    sub->add_option("--costs", a.costs, "JSON object feature name -> positive cost");
    sub->add_option("--random-costs", a.random_costs_seed, "Draw integer costs 1..10 with this seed");
    sub->add_option("--costs-out", a.costs_out, "Write the cost table used");
    sub->add_option("--bonus-scope", a.bonus_scope, "Completion bonus sums costs over tree or all features")
        ->check(CLI::IsMember({"tree", "all"}));
  };
  auto* ct = app.add_subcommand("cost-train", "Learn a feature-acquisition policy by Q-learning");
  add_cost_flags(ct, train);
  ct->add_option("--episodes", train.hp.episodes, "Training episodes");
  ct->add_option("--gamma", train.hp.gamma, "Discount factor");
  ct->add_option("--alpha", train.hp.alpha, "Learning rate");
  ct->add_option("--epsilon", train.hp.epsilon, "Exploration rate");
  ct->add_option("--seed", train.seed, "Episode seed (recorded in the manifest when omitted)");
  ct->add_option("--out", train.out, "Policy JSON (default: standard output)");
  ct->callback([&] { action = [&] { run_cost_train(s, train); }; });

  CostArgs eval;
  auto* ce = app.add_subcommand("cost-eval", "Mean acquisition cost of policies over a dataset");
  add_cost_flags(ce, eval);
  ce->add_option("--policy", eval.policy, "Trained policy JSON");
  ce->add_option("--kinds", eval.kinds, "Comma list of naive,path,greedy,optimized");
  ce->add_option("--out", eval.out, "Output CSV (default: standard output)");
  ce->callback([&] { action = [&] { run_cost_eval(s, eval); }; });

  ImportanceArgs im;
  auto* i = app.add_subcommand("importance", "Gini importance distributions or permutation importance");
  i->add_option("--trees", im.trees, "Tree set JSON");
  i->add_option("--tree", im.tree, "Single tree for permutation importance");
  i->add_option("--data", im.data, "Complete binary CSV")->required();
  i->add_option("--group-map", im.group_map, "Binary column -> original feature JSON");
  i->add_flag("--dedup", im.dedup, "One representative per equivalence class");
  i->add_option("--repeats", im.repeats, "Permutation repeats")->check(CLI::PositiveNumber);
  i->add_option("--seed", im.seed, "Permutation seed (recorded in the manifest when omitted)");
  i->add_option("--compare", im.compare, "Importance CSV of another run");
  i->add_option("--wasserstein-out", im.wasserstein_out, "Per-feature distances to --compare");
  i->add_option("--out", im.out, "Output CSV (default: standard output)");
  i->callback([&] { action = [&] { run_importance(s, im); }; });

  BinarizeArgs bz;
  auto* b = app.add_subcommand("binarize", "Quantile-threshold numeric columns");
  b->add_option("--data", bz.data, "Numeric CSV with a 0/1 label column")->required();
  b->add_option("--quantiles", bz.quantiles, "Comma list of quantiles in (0, 1)");
  b->add_option("--out", bz.out, "Binary CSV (default: standard output)");
  b->add_option("--group-map-out", bz.group_map_out, "Write the bin -> original feature map");
  b->callback([&] { action = [&] { run_binarize(s, bz); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    s.subcommand = sub->get_name();
    record_flags(app, s.flags);
    record_flags(*sub, s.flags);
    action();
    s.write_manifest();
    return kSuccess;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const VariableCapExceeded& ex) {
    err << "error: " << ex.what() << " (raise --max-vars)\n";
    return kCapacity;
  } catch (const InternalError& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kInternal;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  } catch (const json::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kInternal;
  }
}

}  // namespace treednf::cli
