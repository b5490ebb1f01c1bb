#include "mxembed/cli/run_config.hpp"

#include <charconv>
#include <filesystem>

#include "mxembed/error.hpp"

namespace mxembed::cli {

namespace {

constexpr std::string_view kFeaturePrefix = "feature.";

template <typename T>
T number(const std::string& key, const std::string& value) {
  T x{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError(key + ": expected a number, got '" + value + "'");
  }
  return x;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw UsageError(key + ": expected true or false, got '" + value + "'");
}

double fraction(const std::string& key, const std::string& value) {
  const double x = number<double>(key, value);
  if (!(x >= 0.0 && x < 1.0)) throw UsageError(key + " must lie in [0, 1)");
  return x;
}

std::string str(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string str(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::kGiven: return "given";
    case FeatureMode::kMotif: return "motif";
    case FeatureMode::kCombined: return "combined";
  }
  return "given";
}

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "given") return FeatureMode::kGiven;
  if (s == "motif") return FeatureMode::kMotif;
  if (s == "combined") return FeatureMode::kCombined;
  throw UsageError("feature_mode: expected given, motif or combined, got '" + s + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"graph", graph},
      {"node_types", node_types},
  };
  for (const auto& [type, path] : features) kv.emplace_back(std::string(kFeaturePrefix) + type, path);
  const std::vector<std::pair<std::string, std::string>> rest = {
      {"undirected", str(undirected)},
      {"zero_fill", str(zero_fill)},
      {"out", out},
      {"checkpoint", checkpoint},
      {"manifest", manifest},
      {"metapath", metapath},
      {"combine", combine},
      {"feature_mode", to_string(feature_mode)},
      {"raw_counts", str(raw_counts)},
      {"val_frac", str(val_frac)},
      {"test_frac", str(test_frac)},
      {"folds", std::to_string(folds)},
      {"fold", std::to_string(fold)},
      {"inductive", str(inductive)},
      {"node_frac", str(node_frac)},
      {"reveal_frac", str(reveal_frac)},
      {"edge_val_frac", str(edge_val_frac)},
      {"scorer", to_string(scorer)},
      {"trials", std::to_string(trials)},
      {"threads", std::to_string(threads)},
  };
  kv.insert(kv.end(), rest.begin(), rest.end());
  for (auto& p : train.to_key_values()) kv.push_back(std::move(p));
  return kv;
}

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
  std::map<std::string, std::string> training;
  for (const auto& [key, value] : kv) {
    if (key == "graph") graph = value;
    else if (key == "node_types") node_types = value;
    else if (key.starts_with(kFeaturePrefix)) {
      const std::string type = key.substr(kFeaturePrefix.size());
      if (type.empty()) throw UsageError("feature key needs a node type: '" + key + "'");
      if (value.empty()) features.erase(type);
      else features[type] = value;
    } else if (key == "undirected") undirected = boolean(key, value);
    else if (key == "zero_fill") zero_fill = boolean(key, value);
    else if (key == "out") out = value;
    else if (key == "checkpoint") checkpoint = value;
    else if (key == "manifest") manifest = value;
    else if (key == "metapath") metapath = value;
    else if (key == "combine") combine = value;
    else if (key == "feature_mode") feature_mode = parse_feature_mode(value);
    else if (key == "raw_counts") raw_counts = boolean(key, value);
    else if (key == "val_frac") val_frac = fraction(key, value);
    else if (key == "test_frac") test_frac = fraction(key, value);
    else if (key == "folds") folds = number<std::size_t>(key, value);
    else if (key == "fold") fold = number<std::size_t>(key, value);
    else if (key == "inductive") inductive = boolean(key, value);
    else if (key == "node_frac") node_frac = fraction(key, value);
    else if (key == "reveal_frac") reveal_frac = fraction(key, value);
    else if (key == "edge_val_frac") edge_val_frac = fraction(key, value);
    else if (key == "scorer") {
      try {
        scorer = parse_scorer(value);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    } else if (key == "trials") trials = number<std::size_t>(key, value);
    else if (key == "threads") threads = number<std::size_t>(key, value);
    else if (TrainConfig::is_key(key)) training.emplace(key, value);
    else throw UsageError("unknown config key '" + key + "'");
  }
  try {
    train.apply(training);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (trials == 0) throw UsageError("trials must be positive");
  if (threads == 0) throw UsageError("threads must be positive");
  if (folds == 1) throw UsageError("folds must be 0 or at least 2");
  if (folds > 0 && fold >= folds) throw UsageError("fold must be below folds");
}

RunConfig read_run_config(const std::string& path) {
  require_file("config", path);
  RunConfig c;
  try {
    c.apply(read_key_values(path));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

void write_run_config(const RunConfig& config, const std::string& path) {
  write_key_values(path, config.to_key_values());
}

void require_file(const std::string& key, const std::string& path) {
  if (path.empty()) throw UsageError(key + " is required");
  if (!std::filesystem::is_regular_file(path)) throw UsageError(key + " file not found: " + path);
}

}  // namespace mxembed::cli
