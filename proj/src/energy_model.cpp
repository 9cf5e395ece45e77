#include "memjoule/energy_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "memjoule/errors.hpp"
#include "memjoule/numeric.hpp"

namespace memjoule {

void validate_model(const EnergyModelCoefficients& model) {
  if (!std::isfinite(model.alpha_in) || !std::isfinite(model.alpha_out) ||
      !std::isfinite(model.alpha_cross)) {
    throw Error(ErrorKind::InvalidModel,
                "model '" + model.model_id + "' has non-finite coefficients");
  }
  if (model.r_squared && !(*model.r_squared <= 1.0)) {
    throw Error(ErrorKind::InvalidModel,
                "model '" + model.model_id + "' has r_squared > 1");
  }
}

double predict_energy(const EnergyModelCoefficients& model, TokenCount t_in,
                      TokenCount t_out, WarningLog* warnings) {
  validate_model(model);
  if (t_in < 0 || t_out < 0) {
    throw Error(ErrorKind::Domain, "token counts must be non-negative");
  }
  const double in = static_cast<double>(t_in);
  const double out = static_cast<double>(t_out);
  const double energy = model.alpha_in * in + model.alpha_out * out +
                        model.alpha_cross * in * out;
  if (energy < 0.0) {
    warn(warnings, "predicted energy is negative (" + format_double(energy) +
                       " J at t_in=" + std::to_string(t_in) +
                       ", t_out=" + std::to_string(t_out) +
                       "); fitted coefficients are not clamped");
  }
  return energy;
}

EnergyModelCoefficients fit_energy_model(const std::vector<EnergySample>& samples,
                                         const std::string& model_id,
                                         WarningLog* warnings,
                                         double condition_limit) {
  if (samples.size() < 3) {
    throw Error(ErrorKind::InsufficientData,
                "need at least 3 samples to fit 3 coefficients, got " +
                    std::to_string(samples.size()));
  }

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[i];
    if (s.t_in < 0 || s.t_out < 0) {
      throw Error(ErrorKind::Domain, "sample token counts must be non-negative");
    }
    const double in = static_cast<double>(s.t_in);
    const double out = static_cast<double>(s.t_out);
    design(i, 0) = in;
    design(i, 1) = out;
    design(i, 2) = in * out;
    y(i) = s.energy;
  }

  // Column equilibration keeps the cross-term column (which can be ~1e6x
  // the others) from dominating the normal matrix.
  Eigen::Vector3d scale = design.colwise().norm();
  for (int j = 0; j < 3; ++j) {
    if (scale(j) == 0.0) {
      throw Error(ErrorKind::DegenerateDesign,
                  "design matrix column " + std::to_string(j) +
                      " is identically zero; coefficients are not identifiable");
    }
  }
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  const Eigen::Matrix3d normal = scaled.transpose() * scaled;
  const Eigen::Vector3d rhs = scaled.transpose() * y;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eigs(normal);
  const double lo = eigs.eigenvalues().minCoeff();
  const double hi = eigs.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > condition_limit) {
    std::ostringstream msg;
    msg << "design matrix is rank-deficient or ill-conditioned "
        << "(condition estimate ";
    if (lo > 0.0) {
      msg << format_double(hi / lo);
    } else {
      msg << "infinite";
    }
    msg << " exceeds limit " << format_double(condition_limit) << ")";
    throw Error(ErrorKind::DegenerateDesign, msg.str());
  }

  Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  Eigen::Vector3d beta = ldlt.solve(rhs);
  beta += ldlt.solve(rhs - normal * beta);  // one refinement step
  beta = scale.cwiseInverse().asDiagonal() * beta;

  EnergyModelCoefficients model;
  model.model_id = model_id;
  model.alpha_in = beta(0);
  model.alpha_out = beta(1);
  model.alpha_cross = beta(2);

  if (model.alpha_in < 0 || model.alpha_out < 0 || model.alpha_cross < 0) {
    warn(warnings,
         "fit produced negative coefficients (alpha_in=" +
             format_double(model.alpha_in) + ", alpha_out=" +
             format_double(model.alpha_out) + ", alpha_cross=" +
             format_double(model.alpha_cross) + "); kept unclamped");
  }
  if (!(model.alpha_out > model.alpha_in && model.alpha_out > model.alpha_cross)) {
    warn(warnings,
         "advisory: alpha_out does not exceed both alpha_in and alpha_cross; "
         "output-token cost is normally dominant for LLM inference");
  }

  try {
    model.r_squared = r_squared_of(samples, model);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroVariance) throw;
    model.r_squared.reset();  // constant energies: R^2 undefined
  }
  return model;
}

double r_squared_of(const std::vector<EnergySample>& samples,
                    const EnergyModelCoefficients& model) {
  if (samples.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "need at least 2 samples to compute R^2");
  }
  validate_model(model);

  double mean = 0.0;
  for (const auto& s : samples) mean += s.energy;
  mean /= static_cast<double>(samples.size());

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& s : samples) {
    const double predicted = predict_energy(model, s.t_in, s.t_out);
    ss_res += (s.energy - predicted) * (s.energy - predicted);
    ss_tot += (s.energy - mean) * (s.energy - mean);
  }
  if (ss_tot == 0.0) {
    throw Error(ErrorKind::ZeroVariance,
                "all sample energies are identical; R^2 is undefined");
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace memjoule
