#pragma once

// Reference implementations used only by tests. Each is written from the
// operation's contract, without calling into the library code it checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Classic full-matrix Levenshtein distance over already-normalized tokens.
template <typename T>
std::size_t edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t best = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      best = std::min(best, d[i - 1][j] + 1);
      best = std::min(best, d[i][j - 1] + 1);
      d[i][j] = best;
    }
  }
  return d[a.size()][b.size()];
}

struct TargetCounts {
  std::vector<bool> incorrect;  // per hyp token
  std::size_t missed = 0;
};

// Walks one optimal alignment back from the end, preferring a match, then a
// substitution, then a reference-only step, then a hypothesis-only step, and
// marks hypothesis tokens as it goes.
template <typename T>
TargetCounts error_targets(const std::vector<T>& ref, const std::vector<T>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
  TargetCounts out;
  out.incorrect.assign(m, false);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i && j && ref[i - 1] == hyp[j - 1] && d[i - 1][j - 1] == d[i][j]) {
      --i, --j;
    } else if (i && j && d[i - 1][j - 1] + 1 == d[i][j]) {
      out.incorrect[--j] = true;
      --i;
    } else if (i && d[i - 1][j] + 1 == d[i][j]) {
      ++out.missed;
      --i;
    } else {
      out.incorrect[--j] = true;
    }
  }
  return out;
}

// Per-frame two-state machine; returns frame labels.
inline std::vector<bool> hysteresis_labels(const std::vector<double>& probs, double onset,
                                           double offset) {
  std::vector<bool> speech(probs.size());
  bool state = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (state) state = !(probs[i] < offset);
    else state = probs[i] >= onset;
    speech[i] = state;
  }
  return speech;
}

// Maximal runs of true labels as [first, last + 1) frame ranges scaled by hop.
inline std::vector<std::pair<double, double>> label_runs(const std::vector<bool>& labels, double hop) {
  std::vector<std::pair<double, double>> out;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (!labels[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < labels.size() && labels[j]) ++j;
    out.emplace_back(static_cast<double>(i) * hop, static_cast<double>(j) * hop);
    i = j;
  }
  return out;
}

// Repeatedly merges the first too-short gap until none is left, then drops
// too-short segments.
inline std::vector<std::pair<double, double>> two_pass_smooth(std::vector<std::pair<double, double>> segs,
                                                              double min_on, double min_off,
                                                              double eps = 1e-9) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
      if (segs[k + 1].first - segs[k].second < min_off - eps) {
        segs[k].second = std::max(segs[k].second, segs[k + 1].second);
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(k) + 1);
        changed = true;
        break;
      }
    }
  }
  std::vector<std::pair<double, double>> kept;
  for (const auto& s : segs)
    if (s.second - s.first >= min_on - eps) kept.push_back(s);
  return kept;
}

// Frequency (Hz) of the largest-magnitude bin of a naive DFT, ignoring DC.
inline double dft_peak_hz(const std::vector<float>& x, double rate) {
  const std::size_t n = x.size();
  double best_mag = -1.0;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k < n / 2; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += static_cast<double>(x[t]) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best_k = k;
    }
  }
  return static_cast<double>(best_k) * rate / static_cast<double>(n);
}

inline double rms(const std::vector<float>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace oracle
