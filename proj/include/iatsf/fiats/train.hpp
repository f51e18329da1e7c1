#pragma once

#include <limits>
#include <string>

#include "iatsf/adam.hpp"
#include "iatsf/fiats/model.hpp"

namespace iatsf::fiats {

/// Everything needed to continue an interrupted run exactly: optimizer
/// moments, epoch cursor, and the best-validation snapshot. Epoch-local
/// randomness (shuffling, dropout) is derived from (seed, epoch), so no RNG
/// state needs to be carried.
struct TrainerState {
    std::vector<std::vector<double>> adam_m, adam_v;
    int64_t adam_step = 0;
    size_t next_epoch = 0;
    double best_val = std::numeric_limits<double>::infinity();
    size_t best_epoch = 0;
    size_t since_best = 0;
    std::vector<std::vector<double>> best_params;

    bool resuming() const { return next_epoch > 0; }
};

struct TrainResult {
    std::vector<double> train_curve;
    std::vector<double> val_curve;
    double best_val = std::numeric_limits<double>::infinity();
    size_t best_epoch = 0;
    size_t epochs_run = 0;
};

/// Mini-batch Adam on MSE over normalized targets with early stopping on
/// validation MSE. On return the model holds the best-validation parameters;
/// `state`, when provided, is left ready for exact resumption (it keeps the
/// last-epoch parameters implicitly: save the checkpoint before the final
/// best-restore by passing keep_last_params).
TrainResult train(FiatsModel& model, const WindowDataset& train_ds, const WindowDataset& val_ds,
                  TrainerState* state = nullptr, bool restore_best = true);

/// Mean MSE over all windows (normalized scale), no gradients.
double eval_mse(const FiatsModel& model, const WindowDataset& ds);

/// Per-window squared error averaged per channel; rows: [window][channel].
std::vector<std::vector<double>> eval_per_window_channel_mse(const FiatsModel& model,
                                                             const WindowDataset& ds);

}  // namespace iatsf::fiats
