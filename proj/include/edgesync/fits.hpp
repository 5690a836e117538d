#pragma once

// Size-scaling fits of rate data: a + b c^l, a + b/(l + c)^d, and a
// plateau-then-power-law crossover.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace edgesync {

enum class Residual {
  Relative,  ///< log y - log f
  Absolute,  ///< y - f
};

std::string to_string(Residual r);
Residual residual_from_string(const std::string& name);

struct FitOptions {
  Residual residual = Residual::Relative;
  int max_iterations = 10000;  ///< per start
  double tolerance = 1e-10;    ///< simplex size, relative to the parameter scale
};

struct FitResult {
  std::string model;  ///< "exponential" or "powerlaw"
  std::vector<std::pair<std::string, double>> params;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> flags;
  Residual residual = Residual::Relative;
  std::vector<double> l;
  std::vector<double> y;
  std::vector<double> fitted;

  /// Throws std::out_of_range for an unknown name.
  double param(const std::string& name) const;
  double evaluate(double l) const;
  bool has_flag(const std::string& flag) const;
};

/// y ~ a + b c^l. Needs >= 4 points, l strictly increasing, y > 0.
FitResult fit_exponential(const std::vector<double>& l, const std::vector<double>& y,
                          const FitOptions& options = {});

/// y ~ a + b / (l + c)^d. Same preconditions.
FitResult fit_powerlaw(const std::vector<double>& l, const std::vector<double>& y,
                       const FitOptions& options = {});

/// Plateau p for l <= l_c, p (l_c / l)^d beyond; l_c is the sample point that
/// minimizes the total squared residual.
struct CrossoverResult {
  double l_c = 0.0;
  double plateau = 0.0;
  double exponent = 0.0;  ///< d of the tail; NaN when no point lies past l_c
  int tail_points = 0;
  double residual_norm = 0.0;
  /// "no_plateau" (best split at the first point), "no_decay" (best split at
  /// the last point).
  std::vector<std::string> flags;
  std::vector<double> l;
  std::vector<double> y;
  std::vector<double> fitted;
  std::vector<double> split_residuals;  ///< residual norm per candidate split

  bool plateau_detected() const;
  bool has_flag(const std::string& flag) const;
};

/// Needs >= 6 points, l strictly increasing, y > 0.
CrossoverResult detect_crossover(const std::vector<double>& l, const std::vector<double>& y,
                                 const FitOptions& options = {});

nlohmann::json to_json(const FitResult& f);
nlohmann::json to_json(const CrossoverResult& c);

}  // namespace edgesync
