// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msnet/model/model.hpp"
#include "msnet/model/optimizer.hpp"

namespace msnet::model {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  std::size_t batches = 0;
  double ce = 0.0;        // sample-weighted means over the epoch
  double aux = 0.0;
  double total = 0.0;
  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

// One machine-parsable line per epoch:
//   epoch=1 batches=684 ce=0.41 aux=0.02 total=0.412
std::string format_epoch(const EpochLog& log);

struct FitOptions {
  // Called after each completed epoch, e.g. to write a checkpoint.
  std::function<void(const EpochLog&, const CtrModel&, const OptimizerState&)> on_epoch;
  // Number of epochs already completed (resume); shuffles stay aligned.
  std::size_t start_epoch = 0;
};

// Shuffles with a stream derived from (seed, epoch), so a run is fully
// determined by the config. A non-finite batch loss aborts with
// errc::kDiverged before the optimizer touches the parameters.
std::vector<EpochLog> fit(CtrModel& model, OptimizerState& state,
                          std::span<const datagen::ImpressionRecord> train, const FitOptions& options = {});

}  // namespace msnet::model
