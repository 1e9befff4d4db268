// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/metrics/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "msnet/common/error.hpp"
#include "msnet/datagen/market.hpp"

namespace msnet::metrics {

std::optional<double> auc(std::span<const PredictionRecord> records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return records[a].p < records[b].p; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t pos_in_tie = 0;
    while (j < idx.size() && records[idx[j]].p == records[idx[i]].p) {
      pos_in_tie += records[idx[j]].y == 1;
      ++j;
    }
    // ranks i+1 .. j share their average
    pos_rank_sum += static_cast<double>(pos_in_tie) * (static_cast<double>(i + 1 + j) / 2.0);
    n_pos += pos_in_tie;
    i = j;
  }
  const std::size_t n_neg = records.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::optional<double> gauc(std::span<const PredictionRecord> records) {
  std::map<std::int64_t, std::vector<PredictionRecord>> by_user;
  for (const auto& r : records) by_user[r.user_id].push_back(r);
  double num = 0.0, den = 0.0;
  for (const auto& [user, rs] : by_user) {
    const auto a = auc(rs);
    if (!a) continue;
    num += static_cast<double>(rs.size()) * *a;
    den += static_cast<double>(rs.size());
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

std::optional<double> rela_impr(double measured, double base) {
  if (base == 0.5) return std::nullopt;
  return ((measured - 0.5) / (base - 0.5) - 1.0) * 100.0;
}

std::optional<double> pcoc(std::span<const PredictionRecord> records) {
  double sp = 0.0, sy = 0.0;
  for (const auto& r : records) {
    sp += r.p;
    sy += r.y;
  }
  if (sy == 0.0) return std::nullopt;
  return sp / sy;
}

double calibration_error(double v) { return v >= 1.0 ? v - 1.0 : 1.0 / v - 1.0; }

CalN cal_n(std::span<const PredictionRecord> records, std::size_t n_partitions) {
  std::vector<double> sp(n_partitions, 0.0), sy(n_partitions, 0.0);
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(r.partition_id);
    if (k >= n_partitions) throw Error(errc::kInvalidArgument, "partition id " + std::to_string(k) + " out of range");
    sp[k] += r.p;
    sy[k] += r.y;
  }
  CalN c;
  double sq = 0.0;
  for (std::size_t k = 0; k < n_partitions; ++k) {
    if (sy[k] == 0.0) {
      ++c.excluded;
      continue;
    }
    const double e = calibration_error(sp[k] / sy[k]);
    sq += e * e;
    ++c.counted;
  }
  if (c.counted > 0) c.value = std::sqrt(sq / static_cast<double>(c.counted));
  return c;
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(errc::kInvalidArgument, "paired t-test needs two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  TTest t;
  t.df = n - 1.0;
  if (sd == 0.0) {
    t.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    t.p_value = mean == 0.0 ? 1.0 : 0.0;
    return t;
  }
  t.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(t.df);
  t.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t.t)));
  return t;
}

namespace {

GroupMetrics group_metrics(const std::string& name, std::span<const PredictionRecord> records) {
  GroupMetrics g;
  g.name = name;
  g.impressions = records.size();
  for (const auto& r : records) g.clicks += r.y;
  if (records.empty()) {
    g.absent_reason = "no impressions in group";
    return g;
  }
  std::vector<std::vector<PredictionRecord>> parts(kPartitions);
  for (const auto& r : records) parts[static_cast<std::size_t>(r.partition_id)].push_back(r);
  std::vector<double> defined;
  for (const auto& p : parts) {
    g.partition_auc.push_back(auc(p));
    if (g.partition_auc.back()) defined.push_back(*g.partition_auc.back());
  }
  if (!defined.empty()) {
    const double n = static_cast<double>(defined.size());
    const double m = std::accumulate(defined.begin(), defined.end(), 0.0) / n;
    g.auc_mean = m;
    if (defined.size() >= 2) {
      double ss = 0.0;
      for (double x : defined) ss += (x - m) * (x - m);
      g.auc_std = std::sqrt(ss / (n - 1.0));
    }
  }
  g.gauc = gauc(records);
  g.pcoc = pcoc(records);
  g.cal = cal_n(records);
  return g;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json meta_json(const PredictionMeta& m) {
  return {{"model", m.model}, {"config_hash", m.config_hash}, {"dataset_hash", m.dataset_hash}};
}

PredictionMeta meta_from(const nlohmann::json& j) {
  return {j.at("model").get<std::string>(), j.at("config_hash").get<std::string>(),
          j.at("dataset_hash").get<std::string>()};
}

std::string fmt(const std::optional<double>& v, const char* spec = "%.4f") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, *v);
  return buf;
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", *v);
  return buf;
}

}  // namespace

const GroupMetrics* MetricReport::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

nlohmann::json report_definitions() {
  return {{"new", datagen::new_item_definition()},
          {"limited", "target item has stock_count == 1"},
          {"multi", "target item has stock_count > 1"},
          {"partitions", "10 partitions by seeded hash of (user_id, item_id)"},
          {"auc", "rank-sum AUC, ties count 1/2; avg/std over partitions with both classes (sample std)"},
          {"gauc", "impression-weighted per-user AUC; single-class users excluded"},
          {"cal_n", "sqrt(mean error_i^2) over partitions with at least one click"},
          {"tables", "item and category embeddings are shared between target and sequence"}};
}

MetricReport grouped_report(std::span<const PredictionRecord> records, const PredictionMeta& meta,
                            const MetricReport* baseline) {
  MetricReport rep;
  rep.meta = meta;
  std::vector<PredictionRecord> is_new, limited, multi;
  for (const auto& r : records) {
    if (r.is_new) is_new.push_back(r);
    (r.is_limited ? limited : multi).push_back(r);
  }
  rep.groups.push_back(group_metrics("overall", records));
  rep.groups.push_back(group_metrics("new", is_new));
  rep.groups.push_back(group_metrics("limited", limited));
  rep.groups.push_back(group_metrics("multi", multi));
  if (baseline) {
    rep.baseline = baseline->meta;
    for (auto& g : rep.groups) {
      const GroupMetrics* b = baseline->group(g.name);
      if (!b) continue;
      if (g.auc_mean && b->auc_mean) g.rela_auc = rela_impr(*g.auc_mean, *b->auc_mean);
      if (g.gauc && b->gauc) g.rela_gauc = rela_impr(*g.gauc, *b->gauc);
    }
  }
  return rep;
}

nlohmann::json report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["format"] = kReportFormat;
  j["meta"] = meta_json(report.meta);
  j["baseline"] = report.baseline ? meta_json(*report.baseline) : nlohmann::json(nullptr);
  j["baseline_note"] = report.baseline_note;
  j["definitions"] = report_definitions();
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& a : g.partition_auc) parts.push_back(opt(a));
    groups.push_back({{"name", g.name},
                      {"impressions", g.impressions},
                      {"clicks", g.clicks},
                      {"absent_reason", g.absent_reason ? nlohmann::json(*g.absent_reason) : nlohmann::json(nullptr)},
                      {"partition_auc", parts},
                      {"auc_mean", opt(g.auc_mean)},
                      {"auc_std", opt(g.auc_std)},
                      {"gauc", opt(g.gauc)},
                      {"pcoc", opt(g.pcoc)},
                      {"cal_n", opt(g.cal.value)},
                      {"cal_n_counted", g.cal.counted},
                      {"cal_n_excluded", g.cal.excluded},
                      {"rela_impr_auc", opt(g.rela_auc)},
                      {"rela_impr_gauc", opt(g.rela_gauc)}});
  }
  j["groups"] = groups;
  return j;
}

MetricReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kReportFormat) {
      throw Error(errc::kVersion, "unsupported report format '" + j.at("format").dump() + "'");
    }
    MetricReport r;
    r.meta = meta_from(j.at("meta"));
    if (!j.at("baseline").is_null()) r.baseline = meta_from(j.at("baseline"));
    r.baseline_note = j.value("baseline_note", "");
    for (const auto& g : j.at("groups")) {
      GroupMetrics m;
      m.name = g.at("name").get<std::string>();
      m.impressions = g.at("impressions").get<std::size_t>();
      m.clicks = g.at("clicks").get<std::size_t>();
      if (!g.at("absent_reason").is_null()) m.absent_reason = g.at("absent_reason").get<std::string>();
      for (const auto& a : g.at("partition_auc")) m.partition_auc.push_back(opt_from(a));
      m.auc_mean = opt_from(g.at("auc_mean"));
      m.auc_std = opt_from(g.at("auc_std"));
      m.gauc = opt_from(g.at("gauc"));
      m.pcoc = opt_from(g.at("pcoc"));
      m.cal.value = opt_from(g.at("cal_n"));
      m.cal.counted = g.at("cal_n_counted").get<std::size_t>();
      m.cal.excluded = g.at("cal_n_excluded").get<std::size_t>();
      m.rela_auc = opt_from(g.at("rela_impr_auc"));
      m.rela_gauc = opt_from(g.at("rela_impr_gauc"));
      r.groups.push_back(std::move(m));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kParse, std::string("malformed report: ") + e.what());
  }
}

std::string render_report(const MetricReport& report) {
  std::string out = "model " + report.meta.model + "  config " + report.meta.config_hash + "  dataset " +
                    report.meta.dataset_hash + "\n";
  if (report.baseline) {
    out += "RelaImpr baseline: " + report.baseline->model + " (config " + report.baseline->config_hash + ")\n";
  } else if (!report.baseline_note.empty()) {
    out += "RelaImpr: " + report.baseline_note + "\n";
  }
  out += "new items: " + datagen::new_item_definition() + "\n\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-8s %8s %7s %8s %8s %9s %8s %8s %7s %9s\n", "group", "n", "clicks", "avgAUC",
                "stdAUC", "RelaImpr", "GAUC", "RelaImpr", "PCOC", "Cal-N");
  out += line;
  for (const auto& g : report.groups) {
    if (g.absent_reason) {
      std::snprintf(line, sizeof(line), "%-8s absent: %s\n", g.name.c_str(), g.absent_reason->c_str());
      out += line;
      continue;
    }
    std::snprintf(line, sizeof(line), "%-8s %8zu %7zu %8s %8s %9s %8s %8s %7s %9s\n", g.name.c_str(), g.impressions,
                  g.clicks, fmt(g.auc_mean).c_str(), fmt(g.auc_std).c_str(), pct(g.rela_auc).c_str(),
                  fmt(g.gauc).c_str(), pct(g.rela_gauc).c_str(), fmt(g.pcoc, "%.3f").c_str(),
                  fmt(g.cal.value).c_str());
    out += line;
    if (g.cal.excluded > 0) {
      out += "         (Cal-N excludes " + std::to_string(g.cal.excluded) + " partition(s) without clicks)\n";
    }
  }
  return out;
}

}  // namespace msnet::metrics
