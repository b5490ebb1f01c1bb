#pragma once

#include <Eigen/Dense>

namespace mxembed {

struct NceResult {
  double loss = 0.0;
  Eigen::VectorXd dz;
  Eigen::VectorXd dcontext;
  Eigen::MatrixXd dnegatives;  // column i = dE/dc_i
};

/// Negative-sampling loss of one context triple:
///   E = -log s(c.z) - sum_i log s(-c_i.z)
/// where s is the logistic function and c_i are the columns of `negatives`.
NceResult nce_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& context,
                   const Eigen::MatrixXd& negatives);

/// log(s(x)) without overflow for large |x|.
double log_sigmoid(double x);
double sigmoid(double x);

}  // namespace mxembed
