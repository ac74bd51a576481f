// Copyright 2026 The coinsert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coinsert/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coinsert/types.h"

namespace coinsert {
namespace {

// Counts splits of `ranks` into a group of size k whose rank sum is <= or >=
// the observed one (with a small tolerance for half-integer midranks).
void Enumerate(const std::vector<double>& ranks, int k, double observed,
               double* n_le, double* n_ge, double* n_total) {
  const int n = static_cast<int>(ranks.size());
  std::vector<int> idx(static_cast<size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  constexpr double kTol = 1e-9;
  while (true) {
    double sum = 0.0;
    for (int i : idx) sum += ranks[static_cast<size_t>(i)];
    *n_total += 1.0;
    if (sum <= observed + kTol) *n_le += 1.0;
    if (sum >= observed - kTol) *n_ge += 1.0;
    // Next k-combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && idx[static_cast<size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) {
      idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace

std::string_view AlternativeName(Alternative alt) {
  switch (alt) {
    case Alternative::kALess:
      return "a_less";
    case Alternative::kAGreater:
      return "a_greater";
    case Alternative::kTwoSided:
      return "two_sided";
  }
  return "two_sided";
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> MidRanks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return values[i] < values[j];
  });
  std::vector<double> ranks(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

MannWhitneyResult MannWhitneyU(const std::vector<double>& a,
                               const std::vector<double>& b,
                               Alternative alternative) {
  if (a.empty() || b.empty()) {
    throw DomainError("Mann-Whitney U needs two non-empty samples");
  }
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    if (!std::isfinite(v)) throw DomainError("non-finite sample value");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  const std::vector<double> ranks = MidRanks(pooled);
  const double rank_sum_a =
      std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()),
                      0.0);
  MannWhitneyResult out;
  out.u = rank_sum_a - na * (na + 1.0) / 2.0;

  double p_less, p_greater;
  if (pooled.size() <= static_cast<size_t>(kMannWhitneyExactMax)) {
    double n_le = 0.0, n_ge = 0.0, total = 0.0;
    Enumerate(ranks, static_cast<int>(a.size()), rank_sum_a, &n_le, &n_ge,
              &total);
    p_less = n_le / total;
    p_greater = n_ge / total;
    out.exact = true;
  } else {
    double tie_term = 0.0;
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size();) {
      size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
    const double mu = na * nb / 2.0;
    const double var =
        na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) {
      out.p = 1.0;
      return out;
    }
    const double sd = std::sqrt(var);
    p_less = NormalCdf((out.u + 0.5 - mu) / sd);
    p_greater = 1.0 - NormalCdf((out.u - 0.5 - mu) / sd);
  }
  switch (alternative) {
    case Alternative::kALess:
      out.p = p_less;
      break;
    case Alternative::kAGreater:
      out.p = p_greater;
      break;
    case Alternative::kTwoSided:
      out.p = std::min(1.0, 2.0 * std::min(p_less, p_greater));
      break;
  }
  return out;
}

}  // namespace coinsert
