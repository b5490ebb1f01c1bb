#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/model.hpp"
#include "mxembed/train_config.hpp"

namespace mxembed {

struct Checkpoint {
  TrainConfig config;
  std::vector<std::string> node_types;
  std::vector<std::string> relations;  // "src:edge:dst"
  ModelParameters params;
};

/// Versioned binary file: magic "RHMP", format version, the full training
/// config as key=value pairs, the schema names and every tensor.
void save_checkpoint(const std::filesystem::path& path, const ModelParameters& params, const TrainConfig& config,
                     const Schema& schema);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws InvalidArgument when the checkpoint was trained on a different schema or node set.
void check_compatible(const Checkpoint& c, const MultiplexGraph& g);

}  // namespace mxembed
