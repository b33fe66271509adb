#pragma once

#include <Eigen/Dense>

namespace ccm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace ccm
