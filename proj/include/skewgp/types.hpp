#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace skewgp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexList = std::vector<Index>;

}  // namespace skewgp
