#pragma once

#include <stdexcept>
#include <string>

namespace sdrd {

// Box domain (0,L) or (0,L)x(0,L2) with homogeneous Dirichlet boundary.
struct DomainSpec {
  int dimension = 1;
  double length = 1.0;
  double length2 = 1.0;  // second edge, used when dimension == 2

  void validate() const {
    if (dimension != 1 && dimension != 2)
      throw std::invalid_argument("domain dimension must be 1 or 2, got " +
                                  std::to_string(dimension));
    if (!(length > 0.0))
      throw std::invalid_argument("domain edge length must be positive");
    if (dimension == 2 && !(length2 > 0.0))
      throw std::invalid_argument("domain edge length2 must be positive");
  }

  bool contains(double x, double y = 0.0) const {
    if (x < 0.0 || x > length) return false;
    if (dimension == 2 && (y < 0.0 || y > length2)) return false;
    return true;
  }
};

}  // namespace sdrd
