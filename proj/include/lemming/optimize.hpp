#pragma once

// Numerical helpers: log-space arithmetic, batch L-BFGS, SGD step schedule.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace lemming {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Normalized probabilities from log-scores.
inline std::vector<double> softmax(std::span<const double> scores) {
  const double z = log_sum_exp(scores);
  std::vector<double> p(scores.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(scores[i] - z);
  return p;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct LbfgsOptions {
  std::size_t history = 10;
  std::size_t max_iterations = 200;
  double relative_tolerance = 1e-6;  // on objective change
  double gradient_tolerance = 1e-8;  // on ||g|| / max(1, ||x||)
  std::size_t max_line_search = 40;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Objective: returns f(x) and writes the gradient.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Limited-memory BFGS with a backtracking Armijo line search.
inline LbfgsResult minimize_lbfgs(const Objective& f, std::vector<double> x,
                                  const LbfgsOptions& opt = {}) {
  const std::size_t n = x.size();
  std::vector<double> g(n), g_new(n), d(n), x_new(n);
  double fx = f(x, g);
  if (!std::isfinite(fx)) throw std::runtime_error("L-BFGS: non-finite objective at start");
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> mem;
  LbfgsResult res;
  std::vector<double> alpha;

  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const double gnorm = std::sqrt(dot(g, g));
    const double xnorm = std::sqrt(dot(x, x));
    if (gnorm / std::max(1.0, xnorm) < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    // Two-loop recursion: d = -H g.
    std::copy(g.begin(), g.end(), d.begin());
    alpha.assign(mem.size(), 0.0);
    for (std::size_t k = mem.size(); k-- > 0;) {
      alpha[k] = mem[k].rho * dot(mem[k].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * mem[k].y[i];
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : d) v *= gamma;
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = mem[k].rho * dot(mem[k].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += mem[k].s[i] * (alpha[k] - beta);
    }
    for (auto& v : d) v = -v;
    double slope = dot(g, d);
    if (slope >= 0.0) {  // not a descent direction; restart from steepest descent
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -gnorm * gnorm;
    }
    double step = mem.empty() ? 1.0 / std::max(1.0, gnorm) : 1.0;
    double f_new = fx;
    bool accepted = false;
    for (std::size_t ls = 0; ls < opt.max_line_search; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) {
      res.converged = true;  // no further progress possible along d
      break;
    }
    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (mem.size() > opt.history) mem.pop_front();
    }
    const double rel = std::abs(fx - f_new) / std::max({std::abs(fx), std::abs(f_new), 1.0});
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    if (rel < opt.relative_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

/// Step size schedule eta_t = eta0 / (1 + t / decay).
struct StepSchedule {
  double eta0 = 0.1;
  double decay = 1000.0;
  double at(std::size_t t) const { return eta0 / (1.0 + static_cast<double>(t) / decay); }
};

}  // namespace lemming
