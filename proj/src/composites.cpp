#include "cnsp/solver.hpp"

#include <cmath>

namespace cnsp {

double Model::P(double rho) const {
  const double e = pressure_exponent;
  return lin.gamma * (std::pow(rho, e) - 1.0) / e;
}

double Model::dP(double rho) const { return lin.gamma * std::pow(rho, pressure_exponent - 1.0); }

double Model::mu1(double rho) const { return lin.mu1_bar * std::pow(rho, viscosity_exponent); }
double Model::mu2(double rho) const { return lin.mu2_bar * std::pow(rho, viscosity_exponent); }

void Model::validate() const {
  lin.validate();
  if (!(pressure_exponent > 0.0) || !std::isfinite(pressure_exponent))
    throw std::invalid_argument("pressure exponent must be positive");
  if (!std::isfinite(viscosity_exponent)) throw std::invalid_argument("viscosity exponent must be finite");
}

double composite_value(Composite fn, double a, const Model& model) {
  const double rho = 1.0 + a;
  switch (fn) {
  case Composite::Q: return -a / rho;
  case Composite::G: return model.lin.gamma - model.dP(rho) / rho;
  case Composite::H: return model.P(rho) - model.P(1.0) - model.lin.gamma * a;
  case Composite::mu1_tilde: return model.mu1(rho) - model.lin.mu1_bar;
  case Composite::mu2_tilde: return model.mu2(rho) - model.lin.mu2_bar;
  }
  return 0.0;
}

PhysicalField composite(Composite fn, const PhysicalField& a, const Model& model) {
  if (a.rank != 1) throw std::invalid_argument("composites act on a scalar field");
  PhysicalField out(a.grid, 1);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double v = a.data[i];
    if (!(std::fabs(v) < 1.0)) throw std::domain_error("composite needs ||a||_inf < 1");
    out.data[i] = composite_value(fn, v, model);
  }
  return out;
}

} // namespace cnsp
