#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mxembed/model.hpp"

namespace mxembed {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments over every tensor of a ModelParameters.
class Adam {
 public:
  Adam(const ModelParameters& like, AdamOptions options);

  void step(ModelParameters& params, const ModelParameters& grad);
  std::size_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::size_t t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace mxembed
