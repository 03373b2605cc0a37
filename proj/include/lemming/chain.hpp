#pragma once

// Log-space inference on a left-to-right state lattice: forward-backward
// (sum-product) and Viterbi (max-product). States at a position carry a
// score; arcs connect states of adjacent positions and carry a score.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lemming/optimize.hpp"

namespace lemming {

struct ChainArc {
  std::uint32_t from;  // state index at the previous position
  double score;
};

struct Chain {
  std::vector<std::vector<double>> node;                  // [position][state]
  std::vector<std::vector<std::vector<ChainArc>>> incoming;  // [position][state]; empty at 0

  std::size_t length() const { return node.size(); }
};

struct ChainPosteriors {
  std::vector<std::vector<double>> node;                 // [position][state]
  std::vector<std::vector<std::vector<double>>> arc;    // parallel to Chain::incoming
  double log_z = 0.0;
};

struct ChainPath {
  std::vector<std::uint32_t> states;
  double score = 0.0;
};

inline void check_chain(const Chain& c) {
  if (c.node.empty()) throw std::invalid_argument("chain: empty lattice");
  if (c.incoming.size() != c.node.size()) throw std::invalid_argument("chain: arc table size mismatch");
  for (std::size_t i = 0; i < c.node.size(); ++i) {
    if (c.node[i].empty()) throw std::invalid_argument("chain: position " + std::to_string(i) + " has no states");
    if (i > 0 && c.incoming[i].size() != c.node[i].size())
      throw std::invalid_argument("chain: arc table size mismatch");
  }
}

inline ChainPosteriors forward_backward(const Chain& c) {
  check_chain(c);
  const std::size_t n = c.length();
  std::vector<std::vector<double>> alpha(n), beta(n);
  alpha[0] = c.node[0];
  for (std::size_t i = 1; i < n; ++i) {
    alpha[i].assign(c.node[i].size(), kNegInf);
    for (std::size_t s = 0; s < c.node[i].size(); ++s) {
      double acc = kNegInf;
      for (const auto& a : c.incoming[i][s]) acc = log_add(acc, alpha[i - 1][a.from] + a.score);
      alpha[i][s] = acc + c.node[i][s];
    }
  }
  beta[n - 1].assign(c.node[n - 1].size(), 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    beta[i - 1].assign(c.node[i - 1].size(), kNegInf);
    for (std::size_t s = 0; s < c.node[i].size(); ++s) {
      const double tail = c.node[i][s] + beta[i][s];
      for (const auto& a : c.incoming[i][s]) beta[i - 1][a.from] = log_add(beta[i - 1][a.from], a.score + tail);
    }
  }
  ChainPosteriors out;
  out.log_z = log_sum_exp(alpha[n - 1]);
  if (!std::isfinite(out.log_z)) throw std::runtime_error("chain: non-finite log-partition");
  out.node.resize(n);
  out.arc.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.node[i].resize(c.node[i].size());
    for (std::size_t s = 0; s < c.node[i].size(); ++s)
      out.node[i][s] = std::exp(alpha[i][s] + beta[i][s] - out.log_z);
    if (i == 0) continue;
    out.arc[i].resize(c.node[i].size());
    for (std::size_t s = 0; s < c.node[i].size(); ++s) {
      const double tail = c.node[i][s] + beta[i][s] - out.log_z;
      for (const auto& a : c.incoming[i][s]) out.arc[i][s].push_back(std::exp(alpha[i - 1][a.from] + a.score + tail));
    }
  }
  return out;
}

/// Scores this close (relative) count as tied when decoding.
inline constexpr double kTieTolerance = 1e-10;

inline bool beats(double v, double top) {
  if (!std::isfinite(top)) return v > top;
  return v > top + kTieTolerance * std::max(1.0, std::abs(top));
}

/// Best path. Among (near-)equal-scoring paths the one whose state index
/// sequence is lexicographically smallest wins: best completion scores are
/// computed right to left, then states are chosen greedily left to right.
inline ChainPath viterbi(const Chain& c) {
  check_chain(c);
  const std::size_t n = c.length();
  std::vector<std::vector<double>> best(n);  // best score of position i.. end, starting in s
  best[n - 1] = c.node[n - 1];
  for (std::size_t i = n - 1; i > 0; --i) {
    std::vector<double> follow(c.node[i - 1].size(), kNegInf);
    for (std::size_t s = 0; s < c.node[i].size(); ++s)
      for (const auto& a : c.incoming[i][s]) follow[a.from] = std::max(follow[a.from], a.score + best[i][s]);
    best[i - 1].resize(follow.size());
    for (std::size_t s = 0; s < follow.size(); ++s) best[i - 1][s] = c.node[i - 1][s] + follow[s];
  }
  ChainPath path;
  std::uint32_t cur = 0;
  for (std::uint32_t s = 1; s < best[0].size(); ++s)
    if (beats(best[0][s], best[0][cur])) cur = s;
  if (!std::isfinite(best[0][cur])) throw std::runtime_error("chain: no finite path");
  path.states.push_back(cur);
  path.score = c.node[0][cur];
  for (std::size_t i = 1; i < n; ++i) {
    double top = kNegInf;
    std::uint32_t arg = 0;
    bool found = false;
    for (std::uint32_t s = 0; s < c.node[i].size(); ++s) {
      for (const auto& a : c.incoming[i][s]) {
        if (a.from != cur) continue;
        const double v = a.score + best[i][s];
        if (!found || beats(v, top)) {
          top = v;
          arg = s;
          found = true;
        }
      }
    }
    for (const auto& a : c.incoming[i][arg])
      if (a.from == cur) path.score += a.score;
    path.score += c.node[i][arg];
    cur = arg;
    path.states.push_back(cur);
  }
  return path;
}

}  // namespace lemming
