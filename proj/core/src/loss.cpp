#include "mxembed/loss.hpp"

#include <cmath>

#include "mxembed/error.hpp"

namespace mxembed {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

NceResult nce_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& context, const Eigen::MatrixXd& negatives) {
  if (context.size() != z.size() || (negatives.cols() > 0 && negatives.rows() != z.size())) {
    throw InvalidArgument("nce_loss: dimension mismatch");
  }
  NceResult out;
  const double pos = context.dot(z);
  out.loss = -log_sigmoid(pos);
  // d/dx [-log s(x)] = s(x) - 1
  const double gpos = sigmoid(pos) - 1.0;
  out.dz = gpos * context;
  out.dcontext = gpos * z;
  out.dnegatives.resize(z.size(), negatives.cols());
  for (Eigen::Index i = 0; i < negatives.cols(); ++i) {
    const double neg = negatives.col(i).dot(z);
    out.loss -= log_sigmoid(-neg);
    const double gneg = sigmoid(neg);
    out.dz += gneg * negatives.col(i);
    out.dnegatives.col(i) = gneg * z;
  }
  return out;
}

}  // namespace mxembed
