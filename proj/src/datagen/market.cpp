// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/datagen/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::datagen {

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(errc::kInvalidConfig, "generator: " + what); };
  if (n_users == 0 || n_items == 0 || n_categories == 0) fail("n_users, n_items and n_categories must be positive");
  if (days < 1) fail("days must be >= 1");
  if (!(limited_fraction >= 0.0 && limited_fraction <= 1.0)) fail("limited_fraction must lie in [0, 1]");
  if (min_multi < 2 || max_multi < min_multi) fail("multi-stock range must satisfy 2 <= min_multi <= max_multi");
  if (!(purchase_given_click >= 0.0 && purchase_given_click <= 1.0)) fail("purchase_given_click must lie in [0, 1]");
  if (!(exploration >= 0.0 && exploration <= 1.0)) fail("exploration must lie in [0, 1]");
  if (!(activity_mean > 0.0)) fail("activity_mean must be positive");
  if (!(preference_concentration > 0.0)) fail("preference_concentration must be positive");
  if (max_history == 0) fail("max_history must be positive");
  if (initial_age_days < 0) fail("initial_age_days must be >= 0");
}

bool is_new_item(const ItemSpec& item, int day) {
  const int age = day - item.created_day;
  return age >= 0 && age < kNewItemWindowDays;
}

std::string new_item_definition() {
  return "item listed on the impression day or the day before (impression_day - created_day in {0, 1})";
}

double true_ctr(const UserSpec& user, const ItemSpec& item, const GeneratorConfig& config) {
  const double affinity = user.preference.at(static_cast<std::size_t>(item.category_id));
  const double z = config.bias + config.w_aff * affinity + config.w_q * item.quality;
  return 1.0 / (1.0 + std::exp(-z));
}

void MarketState::LiveList::insert(std::int64_t id) {
  const auto idx = static_cast<std::size_t>(id - 1);
  if (position.size() <= idx) position.resize(idx + 1, -1);
  position[idx] = static_cast<std::int64_t>(ids.size());
  ids.push_back(id);
}

void MarketState::LiveList::erase(std::int64_t id) {
  const auto idx = static_cast<std::size_t>(id - 1);
  const std::int64_t pos = position[idx];
  const std::int64_t last = ids.back();
  ids[static_cast<std::size_t>(pos)] = last;
  position[static_cast<std::size_t>(last - 1)] = pos;
  ids.pop_back();
  position[idx] = -1;
}

std::size_t MarketState::index_of(std::int64_t item_id) const {
  if (item_id < 1 || static_cast<std::size_t>(item_id) > items_.size()) {
    throw Error(errc::kIndexOutOfRange, "unknown item id " + std::to_string(item_id));
  }
  return static_cast<std::size_t>(item_id - 1);
}

const ItemSpec& MarketState::item(std::int64_t item_id) const { return items_[index_of(item_id)]; }

int MarketState::remaining_stock(std::int64_t item_id) const { return remaining_[index_of(item_id)]; }

bool MarketState::is_live(std::int64_t item_id) const { return remaining_stock(item_id) > 0; }

ItemSpec MarketState::make_item(int created_day) {
  ItemSpec item;
  item.item_id = static_cast<std::int64_t>(items_.size() + 1);
  std::uniform_int_distribution<std::int64_t> category(0, static_cast<std::int64_t>(config_.n_categories) - 1);
  item.category_id = category(rng_);
  std::bernoulli_distribution limited(config_.limited_fraction);
  if (limited(rng_)) {
    item.stock_count = 1;
  } else {
    std::uniform_int_distribution<int> stock(config_.min_multi, config_.max_multi);
    item.stock_count = stock(rng_);
  }
  // Category-level quality offsets make side information partially
  // predictive of item quality.
  const double base = config_.category_quality_spread *
                      std::sin(1.7 * static_cast<double>(item.category_id) + 0.3);
  std::normal_distribution<double> noise(0.0, config_.item_quality_noise);
  item.quality = std::clamp(base + noise(rng_), -1.0, 1.0);
  item.created_day = created_day;
  return item;
}

void MarketState::list_item(ItemSpec item) {
  remaining_.push_back(item.stock_count);
  live_.insert(item.item_id);
  live_by_category_[static_cast<std::size_t>(item.category_id)].insert(item.item_id);
  items_.push_back(std::move(item));
}

void MarketState::remove_item(std::int64_t item_id) {
  live_.erase(item_id);
  live_by_category_[static_cast<std::size_t>(item(item_id).category_id)].erase(item_id);
}

MarketState build_market(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  MarketState m;
  m.config_ = config;
  m.rng_.seed(seed);
  m.live_by_category_.resize(config.n_categories);
  m.histories_.resize(config.n_users);

  std::gamma_distribution<double> gamma(config.preference_concentration, 1.0);
  std::uniform_real_distribution<double> activity(0.5, 1.5);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    UserSpec user;
    user.user_id = static_cast<std::int64_t>(u + 1);
    user.preference.resize(config.n_categories);
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& p : user.preference) p = gamma(m.rng_);
      norm = 0.0;
      for (double p : user.preference) norm += p * p;
      norm = std::sqrt(norm);
    }
    for (double& p : user.preference) p /= norm;
    user.activity = config.activity_mean * activity(m.rng_);
    m.users_.push_back(std::move(user));
  }

  std::uniform_int_distribution<int> age(0, config.initial_age_days);
  for (std::size_t i = 0; i < config.n_items; ++i) {
    const int created = -age(m.rng_);
    m.list_item(m.make_item(created));
  }
  return m;
}

SimulationResult simulate(MarketState& m, int days, const ImpressionPolicy& policy) {
  if (days < 1) throw Error(errc::kInvalidArgument, "simulate: days must be >= 1");
  const GeneratorConfig& cfg = m.config_;
  SimulationResult result;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> weights(cfg.n_categories);

  for (int d = 0; d < days; ++d) {
    const int day = ++m.day_;
    for (std::size_t k = 0; k < cfg.new_item_rate; ++k) m.list_item(m.make_item(day));

    std::vector<std::size_t> slots;
    for (std::size_t u = 0; u < m.users_.size(); ++u) {
      std::poisson_distribution<int> count(m.users_[u].activity);
      const int n = count(m.rng_);
      slots.insert(slots.end(), static_cast<std::size_t>(n), u);
    }
    std::shuffle(slots.begin(), slots.end(), m.rng_);

    for (std::size_t u : slots) {
      if (m.live_.ids.empty()) {
        result.days_ended_early.push_back(day);
        break;
      }
      const UserSpec& user = m.users_[u];
      std::int64_t item_id = 0;
      if (unit(m.rng_) >= policy.exploration) {
        double max_w = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cfg.n_categories; ++c) {
          if (!m.live_by_category_[c].ids.empty()) {
            max_w = std::max(max_w, policy.affinity_temperature * user.preference[c]);
          }
        }
        for (std::size_t c = 0; c < cfg.n_categories; ++c) {
          weights[c] = m.live_by_category_[c].ids.empty()
                           ? 0.0
                           : std::exp(policy.affinity_temperature * user.preference[c] - max_w);
        }
        std::discrete_distribution<std::size_t> pick_category(weights.begin(), weights.end());
        const auto& pool = m.live_by_category_[pick_category(m.rng_)].ids;
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        item_id = pool[pick(m.rng_)];
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, m.live_.ids.size() - 1);
        item_id = m.live_.ids[pick(m.rng_)];
      }

      const ItemSpec& item = m.item(item_id);
      ImpressionRecord rec;
      rec.day = day;
      rec.user_id = user.user_id;
      rec.item_id = item_id;
      rec.true_ctr = true_ctr(user, item, cfg);
      rec.label = unit(m.rng_) < rec.true_ctr ? 1 : 0;
      rec.item_is_limited = item.is_limited();
      rec.item_is_new = is_new_item(item, day);
      rec.user_history = m.histories_[u];
      rec.item_category_id = item.category_id;

      if (rec.label == 1) {
        auto& hist = m.histories_[u];
        hist.insert(hist.begin(), HistoryEntry{item_id, item.category_id, item.is_limited()});
        if (hist.size() > cfg.max_history) hist.resize(cfg.max_history);
        if (unit(m.rng_) < cfg.purchase_given_click) {
          const std::size_t idx = m.index_of(item_id);
          if (--m.remaining_[idx] == 0) m.remove_item(item_id);
        }
      }
      result.records.push_back(std::move(rec));
    }
  }
  return result;
}

std::string MarketState::serialize() const {
  std::ostringstream out;
  out << "day\t" << day_ << "\n";
  for (const UserSpec& u : users_) {
    out << "user\t" << u.user_id << "\t" << format_double(u.activity);
    for (double p : u.preference) out << "\t" << format_double(p);
    out << "\n";
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const ItemSpec& it = items_[i];
    out << "item\t" << it.item_id << "\t" << it.category_id << "\t" << it.stock_count << "\t"
        << remaining_[i] << "\t" << format_double(it.quality) << "\t" << it.created_day << "\n";
  }
  for (std::size_t u = 0; u < histories_.size(); ++u) {
    out << "history\t" << users_[u].user_id;
    for (const HistoryEntry& h : histories_[u]) out << "\t" << h.item_id;
    out << "\n";
  }
  return out.str();
}

}  // namespace msnet::datagen
