#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "iatsf/events.hpp"
#include "iatsf/text_embed.hpp"

namespace iatsf {

/// Multichannel series, row-major [T x C], with per-row timestamps.
struct Series {
    std::vector<int64_t> timestamps;
    std::vector<double> data;
    size_t channels = 1;

    size_t rows() const { return channels == 0 ? 0 : data.size() / channels; }
    double at(size_t t, size_t c) const { return data[t * channels + c]; }
    double& at(size_t t, size_t c) { return data[t * channels + c]; }
};

struct SplitSpec {
    double train = 0.7, val = 0.1, test = 0.2;
    void validate() const;
};

enum class SplitPart { kTrain, kVal, kTest };

/// Contiguous chronological row blocks: train [0, train_end), val
/// [train_end, val_end), test [val_end, total).
struct SplitRanges {
    size_t train_end = 0;
    size_t val_end = 0;
    size_t total = 0;

    std::pair<size_t, size_t> range(SplitPart part) const;
};

SplitRanges chronological_split(size_t rows, const SplitSpec& spec);

/// Forecast-start indices t with history [t-L, t) and future [t, t+H) fully
/// inside [begin, end).
std::vector<size_t> make_windows(size_t begin, size_t end, size_t lookback, size_t horizon,
                                 size_t stride);

/// Per-channel z-scoring statistics fitted on the training rows.
struct NormStats {
    std::vector<double> mean, stddev;
    size_t channels() const { return mean.size(); }
};

NormStats normalize_fit(const Series& series, size_t row_begin, size_t row_end);
void normalize_apply(Series& series, const NormStats& stats);
void denormalize_apply(Series& series, const NormStats& stats);
double denormalize_value(double v, const NormStats& stats, size_t channel);

/// History patch layout: starts every `stride` steps, plus one extra patch
/// right-aligned to the window end when the stride tiling leaves a tail.
std::vector<size_t> patch_offsets(size_t length, size_t patch_len, size_t stride);

/// Default output patch length: the largest divisor of H not exceeding 10, so
/// every change announced within an announcement window is visible at the
/// start of the patch containing it.
size_t auto_out_patch_len(size_t horizon);

/// Per-patch padded embedding slots with a validity mask (1 = real event,
/// 0 = padded/null). Padded slots hold zero vectors.
struct NewsSlab {
    size_t n_patches = 0, m_max = 0, dim = 0;
    std::vector<double> embeddings;   // [n_patches * m_max * dim]
    std::vector<double> valid;        // [n_patches * m_max]
    std::vector<int64_t> timestamps;  // [n_patches * m_max], -1 for padded

    const double* slot(size_t p, size_t m) const { return embeddings.data() + (p * m_max + m) * dim; }
    double valid_at(size_t p, size_t m) const { return valid[p * m_max + m]; }
};

/// For each patch start, the indices of up to m_max most recent distinct
/// events with timestamp <= patch start, most recent first. Events must be
/// sorted by timestamp.
std::vector<std::vector<size_t>> align_interventions(const std::vector<InterventionEvent>& events,
                                                     const std::vector<int64_t>& patch_starts,
                                                     size_t m_max);

NewsSlab build_news_slab(const std::vector<InterventionEvent>& events,
                         const std::vector<int64_t>& patch_starts, size_t m_max, size_t dim);

enum class TextMode { kGood, kZero, kRandom };
TextMode parse_text_mode(const std::string& s);

/// Fills event embeddings in place according to the text mode:
///  - good: store lookup (hash-featurizer fallback with a warning) or hash
///  - zero: null embeddings (zero vector, masked out downstream)
///  - random: fresh unit-norm Gaussian per event, seeded
/// noise_sigma > 0 adds sigma * N(0, I)/sqrt(D) and renormalizes.
void embed_events(std::vector<InterventionEvent>& events, size_t dim, const EmbeddingStore* store,
                  TextMode mode, uint64_t seed, double noise_sigma = 0.0);

void embed_descriptors(std::vector<ChannelDescriptor>& descriptors, size_t dim,
                       const EmbeddingStore* store, bool zero_desc = false);

/// One training sample. x_h/x_f are stored on the normalized scale.
struct AlignedWindow {
    size_t forecast_start = 0;  // absolute row index t: history [t-L, t), future [t, t+H)
    std::vector<double> x_h;    // [L * C]
    std::vector<double> x_f;    // [H * C]
    NewsSlab news_future;
    NewsSlab news_history;
    std::vector<int64_t> future_patch_starts;
    std::vector<int64_t> history_patch_starts;
};

struct WindowBuildConfig {
    size_t lookback = 60;
    size_t horizon = 14;
    size_t stride = 1;
    size_t patch_len = 16;
    size_t patch_stride = 8;
    size_t out_patch_len = 0;  // 0 = auto_out_patch_len(horizon)
    size_t m_max = 4;
    size_t embed_dim = 64;
    bool history_news = true;  // build the history slab too
    SplitSpec split;
};

struct WindowDataset {
    std::vector<AlignedWindow> windows;
    std::vector<ChannelDescriptor> descriptors;
    std::vector<double> desc_matrix;  // [C * D]
    NormStats stats;
    std::shared_ptr<const std::vector<InterventionEvent>> events;  // embedded
    size_t lookback = 0, horizon = 0, channels = 0, embed_dim = 0, m_max = 0;
    size_t out_patch_len = 0, n_future_patches = 0;
};

/// Splits chronologically, fits normalization on the training rows, windows
/// the requested part, and attaches temporally synced news to every patch.
/// Events must already carry embeddings (see embed_events).
WindowDataset build_windows(const Series& series,
                            std::shared_ptr<const std::vector<InterventionEvent>> events,
                            std::vector<ChannelDescriptor> descriptors,
                            const WindowBuildConfig& config, SplitPart part,
                            const NormStats* fixed_stats = nullptr);

}  // namespace iatsf
