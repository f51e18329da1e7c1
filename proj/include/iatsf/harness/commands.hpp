#pragma once

#include "iatsf/bounds.hpp"
#include "iatsf/fiats/checkpoint.hpp"
#include "iatsf/fiats/whatif.hpp"
#include "iatsf/harness/config.hpp"

namespace iatsf::harness {

/// Per-checkpoint evaluation metrics on the normalized scale, plus
/// denormalized MAE.
struct MetricsReport {
    size_t horizon = 0;
    size_t n_windows = 0;
    std::vector<double> mse_per_channel;
    std::vector<double> mae_per_channel;
    std::vector<double> denorm_mae_per_channel;
    double mse_avg = 0.0;
    double mae_avg = 0.0;
    double denorm_mae_avg = 0.0;
    uint64_t seed = 0;
    uint64_t config_hash = 0;
    double wall_time_s = 0.0;

    std::string to_json() const;
};

/// Raw inputs for one experiment (generated toy data or loaded files).
struct MaterializedData {
    Series series;
    std::vector<InterventionEvent> raw_events;
    std::vector<ChannelDescriptor> raw_descriptors;
    FmTrajectory toy;  // populated when dataset_kind == fm_toy
    bool has_toy = false;
};

MaterializedData load_or_generate(const ExperimentConfig& config);

struct PreparedSplits {
    WindowDataset train, val, test;
};

/// Embeds events/descriptors (train and test text modes may differ) and
/// windows all three splits for one horizon.
PreparedSplits prepare_splits(const MaterializedData& data, const ExperimentConfig& config,
                              size_t horizon, TextMode train_mode, TextMode test_mode,
                              double test_noise_sigma, bool zero_desc);

MetricsReport evaluate(const fiats::FiatsModel& model, const WindowDataset& ds, uint64_t seed);

// Commands. Each writes its outputs under config.out_dir and returns a small
// result for callers/tests.

struct GenerateResult {
    std::string series_path, events_path, descriptors_path, manifest_path;
};
GenerateResult cmd_generate(const ExperimentConfig& config);

struct TrainOutcome {
    std::string checkpoint_path;   // best-validation parameters
    std::string last_checkpoint_path;  // with trainer state, resumable
    std::string loss_csv_path;
    fiats::TrainResult result;
    size_t horizon = 0;
};
std::vector<TrainOutcome> cmd_train(const ExperimentConfig& config,
                                    const std::string& resume_from = "");

std::vector<MetricsReport> cmd_eval(const ExperimentConfig& config,
                                    const std::vector<std::string>& checkpoints,
                                    SplitPart part = SplitPart::kTest);

/// Built-in closed-form case studies ("b22", "b44", "b3", "b5", "all") or a
/// linear-system spec file; writes one FloorReport JSON per study.
std::vector<FloorReport> cmd_bounds(const ExperimentConfig& config, const std::string& preset);

struct AblateResult {
    // text-mode grid rows: {train_mode, test_mode, mse}
    std::vector<std::tuple<std::string, std::string, double>> text_grid;
    // noise sweep rows: {sigma, mse}; baseline_mse is the zero-news model.
    std::vector<std::pair<double, double>> noise_sweep;
    double baseline_mse = 0.0;
};
AblateResult cmd_ablate(const ExperimentConfig& config);

struct WhatIfResult {
    std::vector<double> baseline_prediction;  // [H x C], normalized
    std::vector<double> edited_prediction;    // [H x C], normalized
    std::string prediction_csv_path;
    // Toy swap comparison (when applicable):
    bool has_oracle = false;
    double mse_vs_swapped_oracle = 0.0;
    double mse_vs_original_oracle = 0.0;
    size_t affected_begin = 0;
};
WhatIfResult cmd_whatif(const ExperimentConfig& config, const std::string& checkpoint,
                        size_t window_id, const std::vector<fiats::EventEdit>& edits);

struct AttnResult {
    std::string casm_csv_path, caps_csv_path;
};
AttnResult cmd_attn(const ExperimentConfig& config, const std::string& checkpoint,
                    size_t window_id);

/// Toy helper for the controllability study: test windows whose horizon
/// contains exactly one frequency change, announced at one future patch, with
/// a later quiet patch to swap against. Returns (window index, announcing
/// patch start, quiet patch start).
std::vector<std::tuple<size_t, int64_t, int64_t>> find_controllability_windows(
    const FmTrajectory& toy, const WindowDataset& test_ds, size_t max_count);

/// Counterfactual toy oracle for a swap edit: the announced change happens at
/// the swapped location instead of the original one.
struct SwapOracle {
    std::vector<double> original;  // raw-scale future under the true schedule
    std::vector<double> swapped;   // raw-scale future under the swapped schedule
    size_t affected_begin = 0;     // first horizon step where they can differ
};
SwapOracle swap_oracle(const FmTrajectory& toy, const WindowDataset& ds, size_t window_id,
                       int64_t t_announce, int64_t t_quiet);

}  // namespace iatsf::harness
