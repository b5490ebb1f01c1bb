#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mxembed/walker.hpp"

namespace mxembed {

enum class Activation : std::uint8_t { kElu = 0, kRelu = 1 };

/// Hyperparameters of one training run. Defaults are the reference setting.
struct TrainConfig {
  std::size_t dim = 200;
  std::size_t attention_dim = 20;
  std::size_t levels = 2;  // K
  std::size_t walks_per_node = 20;
  std::size_t walk_length = 10;
  std::size_t window = 5;
  std::size_t negatives = 5;  // L
  std::size_t max_epochs = 50;
  std::size_t patience = 3;
  double learning_rate = 0.001;
  std::size_t neighbor_budget = 10;
  Activation activation = Activation::kElu;
  std::uint64_t seed = 0;
  /// Center nodes per minibatch; each batch carries all triples of its centers.
  std::size_t batch_centers = 1;
  NoiseKind noise = NoiseKind::kUniform;
  /// One context vector per (node, relation) instead of one per node.
  bool per_relation_context = false;
  bool attention = true;

  std::vector<std::size_t> budgets() const { return std::vector<std::size_t>(levels, neighbor_budget); }

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;

  /// Lossless flat key=value form; the order of keys is fixed.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  /// Applies recognized keys on top of the current values. Unknown keys throw.
  void apply(const std::map<std::string, std::string>& kv);
  /// True when `key` names a TrainConfig field.
  static bool is_key(const std::string& key);

  bool operator==(const TrainConfig&) const = default;
};

std::string to_string(Activation a);
std::string to_string(NoiseKind k);
Activation parse_activation(const std::string& s);
NoiseKind parse_noise_kind(const std::string& s);

/// Parses "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::string& path);
void write_key_values(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace mxembed
