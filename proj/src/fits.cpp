#include "edgesync/fits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPenalty = 1e100;

using Model = std::function<double(const std::vector<double>& p, double l)>;

struct Problem {
  const std::vector<double>* l;
  const std::vector<double>* y;
  Model model;
  Residual residual;
};

double objective(const std::vector<double>& p, const Problem& prob) {
  double sum = 0.0;
  for (std::size_t k = 0; k < prob.l->size(); ++k) {
    const double f = prob.model(p, (*prob.l)[k]);
    if (!std::isfinite(f)) return kPenalty;
    double r;
    if (prob.residual == Residual::Relative) {
      if (!(f > 0.0)) return kPenalty;
      r = std::log((*prob.y)[k]) - std::log(f);
    } else {
      r = (*prob.y)[k] - f;
    }
    sum += r * r;
  }
  return sum;
}

double gsl_objective(const gsl_vector* x, void* params) {
  const auto* prob = static_cast<const Problem*>(params);
  std::vector<double> p(x->size);
  for (std::size_t i = 0; i < x->size; ++i) p[i] = gsl_vector_get(x, i);
  return objective(p, *prob);
}

struct Minimum {
  std::vector<double> x;
  double value;
  bool converged;
  int iterations;
};

Minimum simplex(const Problem& prob, const std::vector<double>& start, const FitOptions& opt) {
  static std::once_flag handler_off;
  std::call_once(handler_off, [] { gsl_set_error_handler_off(); });

  const std::size_t n = start.size();
  gsl_multimin_function fn{&gsl_objective, n, const_cast<Problem*>(&prob)};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, start[i]);
    gsl_vector_set(step, i, std::abs(start[i]) > 1e-3 ? 0.1 * std::abs(start[i]) : 0.01);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  Minimum m{start, 0.0, false, 0};
  for (; m.iterations < opt.max_iterations; ++m.iterations) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(gsl_vector_get(s->x, i)));
    if (gsl_multimin_fminimizer_size(s) < opt.tolerance * scale) {
      m.converged = true;
      ++m.iterations;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) m.x[i] = gsl_vector_get(s->x, i);
  m.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return m;
}

// Simplex from `start`, restarted at its own optimum until the value stops
// improving; the last run decides convergence.
Minimum polish(const Problem& prob, const std::vector<double>& start, const FitOptions& opt) {
  Minimum best = simplex(prob, start, opt);
  int total = best.iterations;
  for (int restart = 0; restart < 8; ++restart) {
    Minimum next = simplex(prob, best.x, opt);
    total += next.iterations;
    const bool improved = next.value < best.value * (1.0 - 1e-12);
    if (next.value <= best.value) best = next;
    if (!improved) break;
  }
  best.iterations = total;
  return best;
}

void check_input(const std::vector<double>& l, const std::vector<double>& y, std::size_t min_points,
                 const char* who) {
  if (l.size() != y.size()) throw DimensionError(std::string(who) + ": l and y lengths differ");
  if (l.size() < min_points)
    throw ConfigError(std::string(who) + ": needs at least " + std::to_string(min_points) + " points");
  for (std::size_t k = 0; k < l.size(); ++k) {
    if (!std::isfinite(l[k]) || !std::isfinite(y[k])) throw ConfigError(std::string(who) + ": non-finite input");
    if (!(y[k] > 0.0)) throw ConfigError(std::string(who) + ": y must be positive");
    if (k > 0 && !(l[k] > l[k - 1])) throw ConfigError(std::string(who) + ": l must be strictly increasing");
  }
}

bool is_constant(const std::vector<double>& y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo <= 1e-12 * std::abs(*hi);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double residual_value(Residual mode, double y, double f) {
  if (mode == Residual::Relative) return f > 0.0 ? std::log(y) - std::log(f) : kNaN;
  return y - f;
}

FitResult finish(FitResult r, const Minimum& best, const Model& model, const std::vector<double>& l,
                 const std::vector<double>& y, const std::vector<std::string>& names, const FitOptions& opt) {
  for (std::size_t i = 0; i < names.size(); ++i) r.params.emplace_back(names[i], best.x[i]);
  r.residual_norm = std::sqrt(best.value);
  r.converged = best.converged && std::isfinite(r.residual_norm) && best.value < kPenalty;
  for (double v : best.x)
    if (!std::isfinite(v)) r.converged = false;
  if (!best.converged) r.flags.push_back("max_iterations");
  r.iterations = best.iterations;
  r.residual = opt.residual;
  r.l = l;
  r.y = y;
  for (double x : l) r.fitted.push_back(model(best.x, x));
  return r;
}

FitResult degenerate(const std::string& model, const std::vector<std::string>& names,
                     const std::vector<double>& l, const std::vector<double>& y, const FitOptions& opt) {
  FitResult r;
  r.model = model;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  for (const auto& n : names) r.params.emplace_back(n, n == "a" ? mean : n == "b" ? 0.0 : kNaN);
  r.flags.push_back("degenerate");
  r.residual = opt.residual;
  r.l = l;
  r.y = y;
  r.fitted.assign(l.size(), mean);
  double sum = 0.0;
  for (double v : y) sum += std::pow(residual_value(opt.residual, v, mean), 2);
  r.residual_norm = std::sqrt(sum);
  return r;
}

}  // namespace

std::string to_string(Residual r) { return r == Residual::Relative ? "relative" : "absolute"; }

Residual residual_from_string(const std::string& name) {
  if (name == "relative") return Residual::Relative;
  if (name == "absolute") return Residual::Absolute;
  throw ConfigError("unknown residual mode '" + name + "' (expected relative or absolute)");
}

double FitResult::param(const std::string& name) const {
  for (const auto& [n, v] : params)
    if (n == name) return v;
  throw std::out_of_range("fit has no parameter '" + name + "'");
}

bool FitResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

double FitResult::evaluate(double x) const {
  if (model == "exponential") return param("a") + param("b") * std::pow(param("c"), x);
  return param("a") + param("b") / std::pow(x + param("c"), param("d"));
}

FitResult fit_exponential(const std::vector<double>& l, const std::vector<double>& y, const FitOptions& opt) {
  check_input(l, y, 4, "fit_exponential");
  const std::vector<std::string> names{"a", "b", "c"};
  if (is_constant(y)) return degenerate("exponential", names, l, y, opt);

  const Model model = [](const std::vector<double>& p, double x) {
    if (!(p[2] > 0.0)) return kNaN;
    return p[0] + p[1] * std::pow(p[2], x);
  };
  const Problem prob{&l, &y, model, opt.residual};

  const double a0 = *std::min_element(y.begin(), y.end()) / 2.0;
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < y.size(); ++k)
    ratios.push_back(std::pow((y[k + 1] - a0) / (y[k] - a0), 1.0 / (l[k + 1] - l[k])));
  std::vector<double> c_seeds{median(ratios), 0.25, 0.5, 0.75};

  Minimum best{{}, std::numeric_limits<double>::infinity(), false, 0};
  int iterations = 0;
  for (double c0 : c_seeds) {
    if (!(c0 > 0.0) || !std::isfinite(c0)) continue;
    double log_b = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) log_b += std::log(y[k] - a0) - l[k] * std::log(c0);
    const double b0 = std::exp(log_b / static_cast<double>(l.size()));
    const Minimum m = polish(prob, {a0, b0, c0}, opt);
    iterations += m.iterations;
    if (m.value < best.value) best = m;
  }
  best.iterations = iterations;
  FitResult r;
  r.model = "exponential";
  return finish(std::move(r), best, model, l, y, names, opt);
}

FitResult fit_powerlaw(const std::vector<double>& l, const std::vector<double>& y, const FitOptions& opt) {
  check_input(l, y, 4, "fit_powerlaw");
  const std::vector<std::string> names{"a", "b", "c", "d"};
  if (is_constant(y)) return degenerate("powerlaw", names, l, y, opt);

  const double l_min = l.front();
  const Model model = [l_min](const std::vector<double>& p, double x) {
    if (!(l_min + p[2] > 0.0)) return kNaN;
    return p[0] + p[1] / std::pow(x + p[2], p[3]);
  };
  const Problem prob{&l, &y, model, opt.residual};

  const double a0 = *std::min_element(y.begin(), y.end()) / 2.0;
  // Log-log slope of y - a0 against l + c.
  auto loglog = [&](double c) {
    const Eigen::Index n = static_cast<Eigen::Index>(l.size());
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      x(k, 0) = 1.0;
      x(k, 1) = std::log(l[k] + c);
      v(k) = std::log(y[k] - a0);
    }
    const Eigen::Vector2d s = x.colPivHouseholderQr().solve(v);
    return std::pair{std::exp(s(0)), -s(1)};
  };

  std::vector<std::vector<double>> starts;
  for (double c0 : {0.0, 1.0, 3.0}) {
    if (!(l_min + c0 > 0.0)) continue;
    const auto [b0, d0] = loglog(c0);
    starts.push_back({a0, b0, c0, d0});
  }
  for (double d0 : {2.0, 3.0}) {
    double log_b = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) log_b += std::log(y[k] - a0) + d0 * std::log(l[k] + 1.0);
    starts.push_back({a0, std::exp(log_b / static_cast<double>(l.size())), 1.0, d0});
  }

  Minimum best{{}, std::numeric_limits<double>::infinity(), false, 0};
  int iterations = 0;
  for (const auto& s : starts) {
    const Minimum m = polish(prob, s, opt);
    iterations += m.iterations;
    if (m.value < best.value) best = m;
  }
  best.iterations = iterations;
  FitResult r;
  r.model = "powerlaw";
  return finish(std::move(r), best, model, l, y, names, opt);
}

bool CrossoverResult::plateau_detected() const { return !has_flag("no_plateau"); }

bool CrossoverResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

CrossoverResult detect_crossover(const std::vector<double>& l, const std::vector<double>& y,
                                 const FitOptions& opt) {
  check_input(l, y, 6, "detect_crossover");
  const std::size_t n = l.size();

  struct Split {
    double p, d, value;
  };
  // Log-space linear least squares: log y = P (plateau), P - d log(l/l_c) (tail).
  auto log_fit = [&](std::size_t s) {
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd v(n);
    for (std::size_t k = 0; k < n; ++k) {
      x(k, 0) = 1.0;
      x(k, 1) = k <= s ? 0.0 : -std::log(l[k] / l[s]);
      v(k) = std::log(y[k]);
    }
    if (s + 1 == n) {
      const double p = v.mean();
      return Split{std::exp(p), kNaN, (v.array() - p).square().sum()};
    }
    const Eigen::Vector2d c = x.colPivHouseholderQr().solve(v);
    return Split{std::exp(c(0)), c(1), (x * c - v).squaredNorm()};
  };

  CrossoverResult out;
  out.l = l;
  out.y = y;
  double best_value = std::numeric_limits<double>::infinity();
  std::size_t best_split = 0;
  Split best{0.0, 0.0, 0.0};
  Split flat{0.0, kNaN, 0.0};
  for (std::size_t s = 0; s < n; ++s) {
    Split fit = log_fit(s);
    if (opt.residual == Residual::Absolute) {
      const double lc = l[s];
      const Model model = [lc](const std::vector<double>& p, double x) {
        return x <= lc ? p[0] : p[0] * std::pow(lc / x, p[1]);
      };
      const Problem prob{&l, &y, model, Residual::Absolute};
      if (s + 1 == n) {
        fit.p = 0.0;
        for (double v : y) fit.p += v;
        fit.p /= static_cast<double>(n);
        fit.value = objective({fit.p, 0.0}, prob);
      } else {
        const Minimum m = polish(prob, {fit.p, fit.d}, opt);
        fit = {m.x[0], m.x[1], m.value};
      }
    }
    out.split_residuals.push_back(std::sqrt(fit.value));
    if (s + 1 == n) flat = fit;
    if (fit.value < best_value) {
      best_value = fit.value;
      best_split = s;
      best = fit;
    }
  }
  // A tail that does not decay, or does not beat the pure plateau, is no tail.
  if (!(best.d > 0.0) || flat.value - best_value <= 1e-12 * std::max(1.0, flat.value)) {
    best_split = n - 1;
    best = flat;
    best_value = flat.value;
  }
  out.l_c = l[best_split];
  out.plateau = best.p;
  out.exponent = best.d;
  out.tail_points = static_cast<int>(n - 1 - best_split);
  out.residual_norm = std::sqrt(best_value);
  if (best_split == 0) out.flags.push_back("no_plateau");
  if (best_split + 1 == n) out.flags.push_back("no_decay");
  for (double x : l) out.fitted.push_back(x <= out.l_c ? best.p : best.p * std::pow(out.l_c / x, best.d));
  return out;
}

nlohmann::json to_json(const FitResult& f) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [n, v] : f.params) params[n] = number(v);
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t k = 0; k < f.l.size(); ++k)
    points.push_back({{"l", f.l[k]},
                      {"y", f.y[k]},
                      {"fitted", number(f.fitted[k])},
                      {"residual", number(residual_value(f.residual, f.y[k], f.fitted[k]))}});
  return {{"model", f.model},           {"params", params},         {"residual_norm", number(f.residual_norm)},
          {"converged", f.converged},   {"iterations", f.iterations}, {"flags", f.flags},
          {"residual_mode", to_string(f.residual)}, {"points", points}};
}

nlohmann::json to_json(const CrossoverResult& c) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t k = 0; k < c.l.size(); ++k)
    points.push_back({{"l", c.l[k]},
                      {"y", c.y[k]},
                      {"fitted", number(c.fitted[k])},
                      {"split_residual", number(c.split_residuals[k])}});
  return {{"model", "crossover"},       {"l_c", c.l_c},
          {"plateau", number(c.plateau)}, {"exponent", number(c.exponent)},
          {"tail_points", c.tail_points}, {"residual_norm", number(c.residual_norm)},
          {"plateau_detected", c.plateau_detected()}, {"flags", c.flags},
          {"points", points}};
}

}  // namespace edgesync
