#include "mxembed/adam.hpp"

#include <cmath>

#include "mxembed/error.hpp"

namespace mxembed {

Adam::Adam(const ModelParameters& like, AdamOptions options) : options_(options) {
  for (const auto* m : like.tensors()) {
    m_.push_back(Eigen::MatrixXd::Zero(m->rows(), m->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(m->rows(), m->cols()));
  }
}

void Adam::step(ModelParameters& params, const ModelParameters& grad) {
  auto p = params.tensors();
  auto g = grad.tensors();
  if (p.size() != m_.size() || g.size() != m_.size()) throw InvalidArgument("Adam: tensor count mismatch");
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  for (std::size_t i = 0; i < p.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * *g[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * g[i]->cwiseAbs2();
    p[i]->array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
  }
}

}  // namespace mxembed
