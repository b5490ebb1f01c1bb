#include "mxembed/train_config.hpp"

#include <algorithm>
#include <cmath>

#include "mxembed/error.hpp"
#include "text_util.hpp"

namespace mxembed {

namespace {

const char* const kKeys[] = {"dim",           "attention_dim",  "levels",          "walks_per_node",
                             "walk_length",   "window",         "negatives",       "max_epochs",
                             "patience",      "learning_rate",  "neighbor_budget", "activation",
                             "seed",          "batch_centers",  "noise",           "per_relation_context",
                             "attention"};

std::size_t parse_size(const std::string& key, const std::string& value) {
  auto x = detail::parse_number<std::size_t>(value);
  if (!x) throw InvalidArgument(key + ": expected a non-negative integer, got '" + value + "'");
  return *x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw InvalidArgument(key + ": expected true or false, got '" + value + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kElu ? "elu" : "relu"; }

std::string to_string(NoiseKind k) { return k == NoiseKind::kUniform ? "uniform" : "log_uniform"; }

Activation parse_activation(const std::string& s) {
  if (s == "elu") return Activation::kElu;
  if (s == "relu") return Activation::kRelu;
  throw InvalidArgument("activation: expected elu or relu, got '" + s + "'");
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "uniform") return NoiseKind::kUniform;
  if (s == "log_uniform") return NoiseKind::kLogUniformByDegree;
  throw InvalidArgument("noise: expected uniform or log_uniform, got '" + s + "'");
}

void TrainConfig::validate() const {
  auto positive = [](const char* name, std::size_t v) {
    if (v == 0) throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive("dim", dim);
  positive("attention_dim", attention_dim);
  positive("levels", levels);
  positive("walks_per_node", walks_per_node);
  positive("window", window);
  positive("negatives", negatives);
  positive("max_epochs", max_epochs);
  positive("patience", patience);
  positive("neighbor_budget", neighbor_budget);
  positive("batch_centers", batch_centers);
  if (walk_length < 2) throw InvalidArgument("walk_length must be at least 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be positive");
  }
}

std::vector<std::pair<std::string, std::string>> TrainConfig::to_key_values() const {
  auto s = [](std::size_t v) { return std::to_string(v); };
  return {{"dim", s(dim)},
          {"attention_dim", s(attention_dim)},
          {"levels", s(levels)},
          {"walks_per_node", s(walks_per_node)},
          {"walk_length", s(walk_length)},
          {"window", s(window)},
          {"negatives", s(negatives)},
          {"max_epochs", s(max_epochs)},
          {"patience", s(patience)},
          {"learning_rate", detail::format_double(learning_rate)},
          {"neighbor_budget", s(neighbor_budget)},
          {"activation", to_string(activation)},
          {"seed", std::to_string(seed)},
          {"batch_centers", s(batch_centers)},
          {"noise", to_string(noise)},
          {"per_relation_context", per_relation_context ? "true" : "false"},
          {"attention", attention ? "true" : "false"}};
}

bool TrainConfig::is_key(const std::string& key) {
  return std::find(std::begin(kKeys), std::end(kKeys), key) != std::end(kKeys);
}

void TrainConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "dim") dim = parse_size(key, value);
    else if (key == "attention_dim") attention_dim = parse_size(key, value);
    else if (key == "levels") levels = parse_size(key, value);
    else if (key == "walks_per_node") walks_per_node = parse_size(key, value);
    else if (key == "walk_length") walk_length = parse_size(key, value);
    else if (key == "window") window = parse_size(key, value);
    else if (key == "negatives") negatives = parse_size(key, value);
    else if (key == "max_epochs") max_epochs = parse_size(key, value);
    else if (key == "patience") patience = parse_size(key, value);
    else if (key == "learning_rate") {
      auto x = detail::parse_number<double>(value);
      if (!x) throw InvalidArgument("learning_rate: expected a number, got '" + value + "'");
      learning_rate = *x;
    } else if (key == "neighbor_budget") neighbor_budget = parse_size(key, value);
    else if (key == "activation") activation = parse_activation(value);
    else if (key == "seed") {
      auto x = detail::parse_number<std::uint64_t>(value);
      if (!x) throw InvalidArgument("seed: expected an unsigned integer, got '" + value + "'");
      seed = *x;
    } else if (key == "batch_centers") batch_centers = parse_size(key, value);
    else if (key == "noise") noise = parse_noise_kind(value);
    else if (key == "per_relation_context") per_relation_context = parse_bool(key, value);
    else if (key == "attention") attention = parse_bool(key, value);
    else throw InvalidArgument("unknown training key '" + key + "'");
  }
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  auto in = detail::open_input(path);
  std::map<std::string, std::string> kv;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

void write_key_values(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
  auto out = detail::open_output(path);
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  if (!out) throw Error("failed writing " + path);
}

}  // namespace mxembed
