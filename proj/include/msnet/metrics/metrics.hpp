// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msnet/metrics/prediction.hpp"

namespace msnet::metrics {

// Probability that a random positive outscores a random negative, ties
// counted 1/2. Rank-sum with average ranks, O(n log n). Absent when either
// class is missing.
std::optional<double> auc(std::span<const PredictionRecord> records);

// Impression-weighted mean of per-user AUC. Users whose impressions are all
// one class have no AUC and are left out of both sums.
std::optional<double> gauc(std::span<const PredictionRecord> records);

// ((measured - 0.5) / (base - 0.5) - 1) * 100; absent when base == 0.5.
std::optional<double> rela_impr(double measured, double base);

// sum(p) / sum(y); absent without clicks.
std::optional<double> pcoc(std::span<const PredictionRecord> records);

// PCOC - 1 when PCOC >= 1, else 1/PCOC - 1.
double calibration_error(double pcoc_value);

struct CalN {
  std::optional<double> value;  // sqrt(mean(error_i^2)) over counted partitions
  std::size_t counted = 0;
  std::size_t excluded = 0;     // partitions without clicks
};
CalN cal_n(std::span<const PredictionRecord> records, std::size_t n_partitions = kPartitions);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};
// Two-sided paired t-test on matched samples (e.g. per-partition AUCs).
// Needs at least two pairs.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

struct GroupMetrics {
  std::string name;
  std::size_t impressions = 0;
  std::size_t clicks = 0;
  std::optional<std::string> absent_reason;  // set when the group is empty
  std::vector<std::optional<double>> partition_auc;
  std::optional<double> auc_mean;  // over partitions with a defined AUC
  std::optional<double> auc_std;   // sample standard deviation
  std::optional<double> gauc;
  std::optional<double> pcoc;
  CalN cal;
  std::optional<double> rela_auc;   // vs baseline
  std::optional<double> rela_gauc;
};

struct MetricReport {
  PredictionMeta meta;
  std::optional<PredictionMeta> baseline;
  std::string baseline_note;  // why RelaImpr is missing, if it is
  std::vector<GroupMetrics> groups;  // overall, new, limited, multi
  const GroupMetrics* group(const std::string& name) const;
};

inline constexpr const char* kReportFormat = "msnet-report/v1";

// Group definitions stamped into every report.
nlohmann::json report_definitions();

MetricReport grouped_report(std::span<const PredictionRecord> records, const PredictionMeta& meta,
                            const MetricReport* baseline = nullptr);

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);
std::string render_report(const MetricReport& report);

}  // namespace msnet::metrics
