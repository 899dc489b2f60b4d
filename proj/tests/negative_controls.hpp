#pragma once

// Non-admissible perturbations of an admissible field on MFG(3,1,1,1,1). Each
// breaks group affinity in a different component.

#include <string>
#include <vector>

#include "multiframe/dynamics.hpp"

namespace mftest {

struct NegativeControl {
  std::string name;
  multiframe::MfgVectorField field;
};

inline std::vector<NegativeControl> negative_controls(const multiframe::DynamicsSpec& spec,
                                                      const multiframe::Vector& u) {
  using multiframe::Matrix;
  using multiframe::MfgElement;
  using multiframe::Vector;
  const auto base = multiframe::spec_field(spec, u);
  Vector c(3);
  c << 0.7, -0.4, 1.1;

  std::vector<NegativeControl> out;
  out.push_back({"core x-rate gains R0^T c", [=](const MfgElement& chi) {
                   auto f = base(chi);
                   f.core.x.col(0) += chi.core.R.transpose() * c;
                   return f;
                 }});
  out.push_back({"core x-rate quadratic in x0", [=](const MfgElement& chi) {
                   auto f = base(chi);
                   f.core.x.col(0) += chi.core.x.col(0).squaredNorm() * c;
                   return f;
                 }});
  out.push_back({"core rotation driven by x0", [=](const MfgElement& chi) {
                   auto f = base(chi);
                   f.core.R += chi.core.R * multiframe::hat(Vector(chi.core.x.col(0)), 3);
                   return f;
                 }});
  out.push_back({"core y-rate gains R0 c", [=](const MfgElement& chi) {
                   auto f = base(chi);
                   f.core.y.col(0) += chi.core.R * c;
                   return f;
                 }});
  out.push_back({"left rotation rate without adjoint", [=](const MfgElement& chi) {
                   auto f = base(chi);
                   f.left[0].R += chi.left[0].R * multiframe::hat(c, 3);
                   return f;
                 }});
  return out;
}

}  // namespace mftest
