// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::model {

std::string format_epoch(const EpochLog& log) {
  return "epoch=" + std::to_string(log.epoch) + " batches=" + std::to_string(log.batches) +
         " ce=" + format_double(log.ce) + " aux=" + format_double(log.aux) + " total=" + format_double(log.total);
}

std::vector<EpochLog> fit(CtrModel& model, OptimizerState& state,
                          std::span<const datagen::ImpressionRecord> train, const FitOptions& options) {
  if (train.empty()) throw Error(errc::kInvalidArgument, "fit: empty training set");
  const ModelConfig& cfg = model.config();
  const features::SampleBatch all = model.encode(train);
  const Adagrad opt(cfg.learning_rate, cfg.adagrad_decay);
  std::vector<std::size_t> order(all.batch_size);
  std::vector<EpochLog> logs;
  for (std::size_t epoch = options.start_epoch; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix64(cfg.seed * 0x9e3779b97f4a7c15ULL + epoch));
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch + 1;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const features::SampleBatch batch =
          all.take(std::span<const std::size_t>(order).subspan(begin, end - begin));
      ad::Graph g(model.params());
      const ForwardResult fwd = model.forward(g, batch);
      const Losses l = model.losses(g, batch, fwd);
      const double total = l.total.value()[0];
      if (!std::isfinite(total)) {
        throw Error(errc::kDiverged, "loss became non-finite in epoch " + std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(log.batches + 1));
      }
      const ad::GradMap grads = g.backward(l.total);
      opt.step(model.params(), grads, state);
      const double w = static_cast<double>(end - begin);
      log.ce += w * l.ce.value()[0];
      log.aux += w * l.aux_value();
      log.total += w * total;
      ++log.batches;
    }
    const double n = static_cast<double>(order.size());
    log.ce /= n;
    log.aux /= n;
    log.total /= n;
    logs.push_back(log);
    if (options.on_epoch) options.on_epoch(log, model, state);
  }
  return logs;
}

}  // namespace msnet::model
