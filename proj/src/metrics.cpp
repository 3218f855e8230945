// Copyright 2026 The OLSR Authors. All Rights Reserved.
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

#include "olsr/metrics.hpp"

#include <algorithm>
#include <functional>
#include <vector>

#include "olsr/error.hpp"

namespace olsr {
namespace {

struct Group {
  double score;
  std::size_t id;
  std::size_t ood;
};

/// Distinct scores in descending order with per-class multiplicities.
std::vector<Group> groups_descending(std::span<const double> id_scores,
                                     std::span<const double> ood_scores) {
  if (id_scores.empty() || ood_scores.empty()) {
    fail(ErrorCode::kEvaluation, "metrics need non-empty ID and OoD score sets");
  }
  std::vector<double> id(id_scores.begin(), id_scores.end());
  std::vector<double> ood(ood_scores.begin(), ood_scores.end());
  std::sort(id.begin(), id.end(), std::greater<>());
  std::sort(ood.begin(), ood.end(), std::greater<>());
  std::vector<Group> out;
  std::size_t i = 0, j = 0;
  while (i < id.size() || j < ood.size()) {
    double s;
    if (j == ood.size() || (i < id.size() && id[i] >= ood[j]))
      s = id[i];
    else
      s = ood[j];
    Group g{s, 0, 0};
    while (i < id.size() && id[i] == s) ++i, ++g.id;
    while (j < ood.size() && ood[j] == s) ++j, ++g.ood;
    out.push_back(g);
  }
  return out;
}

}  // namespace

double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                  double tpr) {
  const auto groups = groups_descending(id_scores, ood_scores);
  const double n = static_cast<double>(id_scores.size());
  const double m = static_cast<double>(ood_scores.size());
  std::size_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.id;
    fp += g.ood;
    if (static_cast<double>(tp) / n >= tpr) return static_cast<double>(fp) / m;
  }
  return 1.0;
}

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  const auto groups = groups_descending(id_scores, ood_scores);
  // Walking downwards, every ID sample beats all OoD samples below it.
  double wins = 0.0;
  std::size_t ood_above = 0;
  const std::size_t m = ood_scores.size();
  for (const auto& g : groups) {
    const std::size_t below = m - ood_above - g.ood;
    wins += static_cast<double>(g.id) * (static_cast<double>(below) + 0.5 * static_cast<double>(g.ood));
    ood_above += g.ood;
  }
  return wins / (static_cast<double>(id_scores.size()) * static_cast<double>(m));
}

double aupr_in(std::span<const double> id_scores, std::span<const double> ood_scores) {
  const auto groups = groups_descending(id_scores, ood_scores);
  const double n = static_cast<double>(id_scores.size());
  std::size_t tp = 0, fp = 0;
  double prev_recall = 0.0;
  double area = 0.0;
  for (const auto& g : groups) {
    tp += g.id;
    fp += g.ood;
    if (g.id == 0) continue;
    const double recall = static_cast<double>(tp) / n;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

double detection_error(std::span<const double> id_scores, std::span<const double> ood_scores) {
  const auto groups = groups_descending(id_scores, ood_scores);
  const double n = static_cast<double>(id_scores.size());
  const double m = static_cast<double>(ood_scores.size());
  double best = 0.5;  // threshold +inf: nothing accepted
  std::size_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.id;
    fp += g.ood;
    const double err = 0.5 * (1.0 - static_cast<double>(tp) / n) + 0.5 * static_cast<double>(fp) / m;
    best = std::min(best, err);
  }
  return best;
}

EvalReport evaluate(std::span<const double> id_scores, std::span<const double> ood_scores) {
  EvalReport r;
  r.fpr_at_95tpr = fpr_at_tpr(id_scores, ood_scores, 0.95);
  r.auroc = auroc(id_scores, ood_scores);
  r.aupr_in = aupr_in(id_scores, ood_scores);
  r.detection_error = detection_error(id_scores, ood_scores);
  r.id_count = id_scores.size();
  r.ood_count = ood_scores.size();
  return r;
}

std::vector<std::size_t> histogram(std::span<const double> scores, std::size_t bins, double lo,
                                   double hi) {
  if (bins == 0 || !(hi > lo)) fail(ErrorCode::kParameter, "histogram needs bins > 0 and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double s : scores) {
    const double pos = (s - lo) / width;
    std::size_t k = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
    ++counts[std::min(k, bins - 1)];
  }
  return counts;
}

}  // namespace olsr
