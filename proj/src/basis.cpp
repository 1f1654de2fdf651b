#include "volgs/basis.hpp"

#include <string>

namespace volgs {

std::string_view to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::gaussian:
      return "gaussian";
    case BasisFamily::bump:
      return "bump";
    case BasisFamily::wendland:
      return "wendland";
    case BasisFamily::inv_multiquadric:
      return "inv_multiquadric";
    case BasisFamily::inv_quadratic:
      return "inv_quadratic";
    case BasisFamily::c0_matern:
      return "c0_matern";
  }
  return "unknown";
}

BasisFamily parse_basis_family(std::string_view tag) {
  for (BasisFamily f : kAllBasisFamilies) {
    if (to_string(f) == tag) return f;
  }
  throw ParameterError("unknown basis family '" + std::string(tag) + "'");
}

}  // namespace volgs
