// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace msnet::datagen {

// Synthetic C2C marketplace. Click probabilities come from a known logistic
// model, so the Bayes-optimal predictor is available as ground truth.
struct GeneratorConfig {
  std::size_t n_users = 2000;
  std::size_t n_items = 10000;        // initial catalog
  std::size_t n_categories = 8;
  int days = 8;                       // days 1-7 train, last day test
  double limited_fraction = 0.7;      // share of items with stock 1
  int min_multi = 2;                  // stock range for multi-stock items
  int max_multi = 50;
  // true_ctr = sigmoid(bias + w_aff * preference[category] + w_q * quality)
  double bias = -2.5;
  double w_aff = 3.0;
  double w_q = 1.5;
  double purchase_given_click = 0.5;
  std::size_t new_item_rate = 1000;   // items listed per day
  double activity_mean = 12.5;        // impressions per user per day
  double exploration = 0.2;           // share of uniformly sampled impressions
  double affinity_temperature = 4.0;  // softmax sharpness of category choice
  double preference_concentration = 0.3;
  double category_quality_spread = 0.5;
  double item_quality_noise = 0.5;
  std::size_t max_history = 20;
  int initial_age_days = 14;          // initial catalog listed in [-age, 0]

  void validate() const;
};

struct ItemSpec {
  std::int64_t item_id = 0;
  std::int64_t category_id = 0;
  int stock_count = 1;
  double quality = 0.0;
  int created_day = 0;

  bool is_limited() const noexcept { return stock_count == 1; }
  friend bool operator==(const ItemSpec&, const ItemSpec&) = default;
};

struct UserSpec {
  std::int64_t user_id = 0;
  std::vector<double> preference;  // unit L2 norm, one entry per category
  double activity = 1.0;
};

struct HistoryEntry {
  std::int64_t item_id = 0;
  std::int64_t category_id = 0;
  bool is_limited = false;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct ImpressionRecord {
  int day = 0;
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  int label = 0;
  double true_ctr = 0.5;
  bool item_is_limited = false;
  bool item_is_new = false;
  std::vector<HistoryEntry> user_history;  // prior clicks, most recent first
  std::int64_t item_category_id = 0;
  friend bool operator==(const ImpressionRecord&, const ImpressionRecord&) = default;
};

// "New product": listed on the impression day or the day before.
inline constexpr int kNewItemWindowDays = 2;
bool is_new_item(const ItemSpec& item, int day);
std::string new_item_definition();

class MarketState;
MarketState build_market(const GeneratorConfig& config, std::uint64_t seed);

struct ImpressionPolicy {
  double exploration = 0.2;
  double affinity_temperature = 4.0;
  static ImpressionPolicy from(const GeneratorConfig& config) {
    return {config.exploration, config.affinity_temperature};
  }
};

struct SimulationResult {
  std::vector<ImpressionRecord> records;
  std::vector<int> days_ended_early;  // days that ran out of live items
};

SimulationResult simulate(MarketState& market, int days, const ImpressionPolicy& policy);

double true_ctr(const UserSpec& user, const ItemSpec& item, const GeneratorConfig& config);

class MarketState {
 public:
  const GeneratorConfig& config() const noexcept { return config_; }
  const std::vector<UserSpec>& users() const noexcept { return users_; }
  const std::vector<ItemSpec>& items() const noexcept { return items_; }
  const ItemSpec& item(std::int64_t item_id) const;
  int remaining_stock(std::int64_t item_id) const;
  bool is_live(std::int64_t item_id) const;
  std::size_t live_count() const noexcept { return live_.ids.size(); }
  int day() const noexcept { return day_; }
  const std::vector<HistoryEntry>& history(std::size_t user_index) const { return histories_[user_index]; }

  // Canonical text dump of the whole state (users, catalog, stock, histories).
  std::string serialize() const;

 private:
  friend MarketState build_market(const GeneratorConfig&, std::uint64_t);
  friend SimulationResult simulate(MarketState&, int, const ImpressionPolicy&);

  // Swap-remove list of live item ids with O(1) membership updates.
  struct LiveList {
    std::vector<std::int64_t> ids;
    std::vector<std::int64_t> position;  // by item index, -1 when absent
    void insert(std::int64_t id);
    void erase(std::int64_t id);
  };

  std::size_t index_of(std::int64_t item_id) const;
  void list_item(ItemSpec item);
  void remove_item(std::int64_t item_id);
  ItemSpec make_item(int created_day);

  GeneratorConfig config_;
  std::mt19937_64 rng_;
  int day_ = 0;
  std::vector<UserSpec> users_;
  std::vector<ItemSpec> items_;
  std::vector<int> remaining_;
  LiveList live_;
  std::vector<LiveList> live_by_category_;
  std::vector<std::vector<HistoryEntry>> histories_;
};

}  // namespace msnet::datagen
