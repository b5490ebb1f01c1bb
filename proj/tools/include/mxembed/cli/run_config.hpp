#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mxembed/metrics.hpp"
#include "mxembed/train_config.hpp"

namespace mxembed::cli {

/// Bad flags, bad config values or missing input files; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureMode : std::uint8_t { kGiven = 0, kMotif = 1, kCombined = 2 };

std::string to_string(FeatureMode m);
FeatureMode parse_feature_mode(const std::string& s);

/// Everything one command needs. Serializes to a flat key=value file that
/// reruns the command exactly.
struct RunConfig {
  std::string graph;       // edges: edge_type src dst
  std::string node_types;  // optional: node_id node_type
  std::map<std::string, std::string> features;  // node type -> feature file ("feature.<type>" keys)
  bool undirected = false;
  bool zero_fill = false;
  std::string out;
  std::string checkpoint;
  std::string manifest;
  std::string metapath;  // "a,b,a"
  std::string combine;   // motifs: given feature table to append to

  FeatureMode feature_mode = FeatureMode::kGiven;
  bool raw_counts = false;
  TrainConfig train;

  double val_frac = 0.05;
  double test_frac = 0.10;
  std::size_t folds = 0;  // > 0 selects cross-validation fold `fold`
  std::size_t fold = 0;
  bool inductive = false;
  double node_frac = 0.15;
  double reveal_frac = 0.5;
  double edge_val_frac = 0.2;

  Scorer scorer = Scorer::kDot;
  std::size_t trials = 1;
  std::size_t threads = 1;

  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  /// Unknown keys and malformed values raise UsageError.
  void apply(const std::map<std::string, std::string>& kv);
  bool operator==(const RunConfig&) const = default;
};

RunConfig read_run_config(const std::string& path);
void write_run_config(const RunConfig& config, const std::string& path);

/// Throws UsageError naming `key` and the path when the file is absent.
void require_file(const std::string& key, const std::string& path);

}  // namespace mxembed::cli
