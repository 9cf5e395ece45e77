#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memjoule/numeric.hpp"
#include "memjoule/warnings.hpp"

namespace memjoule {

// Bilinear per-inference energy model:
//   E(t_in, t_out) = alpha_in*t_in + alpha_out*t_out + alpha_cross*t_in*t_out
// One coefficient triple per (LLM, hardware) pair; model_id labels the pair.
struct EnergyModelCoefficients {
  std::string model_id;
  double alpha_in = 0.0;    // J per input token
  double alpha_out = 0.0;   // J per output token
  double alpha_cross = 0.0; // J per (input token * output token)
  std::optional<double> r_squared;
};

// One measured inference: token pair plus integrated energy in joules.
struct EnergySample {
  TokenCount t_in = 0;
  TokenCount t_out = 0;
  double energy = 0.0;
};

// Throws ErrorKind::InvalidModel if a coefficient is non-finite or a stored
// r_squared exceeds 1.
void validate_model(const EnergyModelCoefficients& model);

// Evaluates the bilinear model. Negative results (possible with fitted
// negative coefficients) are warned about, never clamped.
double predict_energy(const EnergyModelCoefficients& model, TokenCount t_in,
                      TokenCount t_out, WarningLog* warnings = nullptr);

// Ordinary least squares over the features [t_in, t_out, t_in*t_out].
// There is deliberately no intercept column: the model has no constant term,
// so idle-power offsets must be baseline-subtracted upstream (see the trace
// functions). The equilibrated normal matrix is rejected when its condition
// estimate exceeds condition_limit.
EnergyModelCoefficients fit_energy_model(const std::vector<EnergySample>& samples,
                                         const std::string& model_id,
                                         WarningLog* warnings = nullptr,
                                         double condition_limit = 1e12);

// 1 - SS_res/SS_tot with mean-centered SS_tot. May be negative for bad
// models; throws ErrorKind::ZeroVariance when all energies are identical.
double r_squared_of(const std::vector<EnergySample>& samples,
                    const EnergyModelCoefficients& model);

}  // namespace memjoule
