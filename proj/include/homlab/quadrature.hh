#ifndef HOMLAB_QUADRATURE_HH_
#define HOMLAB_QUADRATURE_HH_

#include <vector>

namespace homlab {

//! rule on [0,1]; weights sum to 1
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

//! Gauss-Legendre with 1..5 points, exact up to degree 2·points-1
QuadratureRule gauss_legendre_unit(int points);

}  // namespace homlab

#endif  // HOMLAB_QUADRATURE_HH_
