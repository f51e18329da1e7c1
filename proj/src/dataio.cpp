#include "iatsf/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace iatsf {

void SplitSpec::validate() const {
    if (train < 0 || val < 0 || test < 0) throw ValidationError("SplitSpec: negative fraction");
    if (std::fabs(train + val + test - 1.0) > 1e-9) {
        throw ValidationError("SplitSpec: fractions must sum to 1");
    }
}

std::pair<size_t, size_t> SplitRanges::range(SplitPart part) const {
    switch (part) {
        case SplitPart::kTrain: return {0, train_end};
        case SplitPart::kVal: return {train_end, val_end};
        case SplitPart::kTest: return {val_end, total};
    }
    throw ValidationError("SplitRanges: bad part");
}

SplitRanges chronological_split(size_t rows, const SplitSpec& spec) {
    spec.validate();
    SplitRanges r;
    r.total = rows;
    r.train_end = static_cast<size_t>(std::floor(static_cast<double>(rows) * spec.train));
    r.val_end = static_cast<size_t>(std::floor(static_cast<double>(rows) * (spec.train + spec.val)));
    return r;
}

std::vector<size_t> make_windows(size_t begin, size_t end, size_t lookback, size_t horizon,
                                 size_t stride) {
    if (stride == 0) throw ValidationError("make_windows: stride must be positive");
    if (end < begin || end - begin < lookback + horizon) {
        throw ValidationError("make_windows: series too short for lookback + horizon");
    }
    std::vector<size_t> starts;
    for (size_t t = begin + lookback; t + horizon <= end; t += stride) starts.push_back(t);
    return starts;
}

NormStats normalize_fit(const Series& series, size_t row_begin, size_t row_end) {
    if (row_end <= row_begin || row_end > series.rows()) {
        throw ValidationError("normalize_fit: bad row range");
    }
    const size_t c = series.channels;
    const double n = static_cast<double>(row_end - row_begin);
    NormStats stats;
    stats.mean.assign(c, 0.0);
    stats.stddev.assign(c, 0.0);
    for (size_t t = row_begin; t < row_end; ++t)
        for (size_t j = 0; j < c; ++j) stats.mean[j] += series.at(t, j);
    for (size_t j = 0; j < c; ++j) stats.mean[j] /= n;
    for (size_t t = row_begin; t < row_end; ++t)
        for (size_t j = 0; j < c; ++j) {
            double d = series.at(t, j) - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    for (size_t j = 0; j < c; ++j) {
        stats.stddev[j] = std::sqrt(stats.stddev[j] / n);
        if (stats.stddev[j] < 1e-12) {
            std::fprintf(stderr, "warning: channel %zu has ~zero variance; std clamped to 1\n", j);
            stats.stddev[j] = 1.0;
        }
    }
    return stats;
}

void normalize_apply(Series& series, const NormStats& stats) {
    if (stats.channels() != series.channels) {
        throw DimensionError("normalize_apply: stats/channel count mismatch");
    }
    const size_t c = series.channels;
    for (size_t t = 0; t < series.rows(); ++t)
        for (size_t j = 0; j < c; ++j)
            series.at(t, j) = (series.at(t, j) - stats.mean[j]) / stats.stddev[j];
}

void denormalize_apply(Series& series, const NormStats& stats) {
    if (stats.channels() != series.channels) {
        throw DimensionError("denormalize_apply: stats/channel count mismatch");
    }
    const size_t c = series.channels;
    for (size_t t = 0; t < series.rows(); ++t)
        for (size_t j = 0; j < c; ++j)
            series.at(t, j) = series.at(t, j) * stats.stddev[j] + stats.mean[j];
}

double denormalize_value(double v, const NormStats& stats, size_t channel) {
    return v * stats.stddev[channel] + stats.mean[channel];
}

std::vector<size_t> patch_offsets(size_t length, size_t patch_len, size_t stride) {
    if (patch_len == 0 || stride == 0) throw ValidationError("patch_offsets: zero patch/stride");
    if (length < patch_len) {
        throw DimensionError("patch_offsets: length " + std::to_string(length) +
                             " shorter than patch " + std::to_string(patch_len));
    }
    std::vector<size_t> starts;
    for (size_t s = 0; s + patch_len <= length; s += stride) starts.push_back(s);
    if (starts.back() + patch_len < length) starts.push_back(length - patch_len);
    return starts;
}

size_t auto_out_patch_len(size_t horizon) {
    if (horizon == 0) throw ValidationError("auto_out_patch_len: zero horizon");
    for (size_t d = std::min<size_t>(10, horizon); d >= 1; --d) {
        if (horizon % d == 0) return d;
    }
    return 1;
}

std::vector<std::vector<size_t>> align_interventions(const std::vector<InterventionEvent>& events,
                                                     const std::vector<int64_t>& patch_starts,
                                                     size_t m_max) {
    for (size_t i = 1; i < events.size(); ++i) {
        if (events[i].timestamp < events[i - 1].timestamp) {
            throw ValidationError("align_interventions: events not sorted by timestamp");
        }
    }
    std::vector<std::vector<size_t>> out(patch_starts.size());
    for (size_t p = 0; p < patch_starts.size(); ++p) {
        const int64_t start = patch_starts[p];
        // Last event with timestamp <= start (boundary rule: an event landing
        // exactly on the patch start is usable).
        auto it = std::upper_bound(events.begin(), events.end(), start,
                                   [](int64_t t, const InterventionEvent& e) { return t < e.timestamp; });
        std::set<std::string> seen;
        for (auto rit = std::make_reverse_iterator(it);
             rit != events.rend() && out[p].size() < m_max; ++rit) {
            if (seen.insert(rit->text).second) {
                out[p].push_back(static_cast<size_t>(std::distance(events.begin(), rit.base()) - 1));
            }
        }
    }
    return out;
}

NewsSlab build_news_slab(const std::vector<InterventionEvent>& events,
                         const std::vector<int64_t>& patch_starts, size_t m_max, size_t dim) {
    NewsSlab slab;
    slab.n_patches = patch_starts.size();
    slab.m_max = m_max;
    slab.dim = dim;
    slab.embeddings.assign(slab.n_patches * m_max * dim, 0.0);
    slab.valid.assign(slab.n_patches * m_max, 0.0);
    slab.timestamps.assign(slab.n_patches * m_max, -1);

    std::vector<std::vector<size_t>> aligned = align_interventions(events, patch_starts, m_max);
    for (size_t p = 0; p < aligned.size(); ++p) {
        for (size_t m = 0; m < aligned[p].size(); ++m) {
            const InterventionEvent& e = events[aligned[p][m]];
            slab.timestamps[p * m_max + m] = e.timestamp;
            if (!e.embedding) continue;  // null event: zero vector, mask 0
            const std::vector<double>& v = *e.embedding;
            if (v.size() != dim) {
                throw DimensionError("build_news_slab: embedding dim mismatch");
            }
            if (l2_norm(v) == 0.0) continue;
            std::copy(v.begin(), v.end(), slab.embeddings.begin() + (p * m_max + m) * dim);
            slab.valid[p * m_max + m] = 1.0;
        }
    }
    return slab;
}

TextMode parse_text_mode(const std::string& s) {
    if (s == "good") return TextMode::kGood;
    if (s == "zero") return TextMode::kZero;
    if (s == "random") return TextMode::kRandom;
    throw ValidationError("unknown text mode '" + s + "' (expected good|zero|random)");
}

void embed_events(std::vector<InterventionEvent>& events, size_t dim, const EmbeddingStore* store,
                  TextMode mode, uint64_t seed, double noise_sigma) {
    Rng base(seed);
    size_t warned = 0;
    for (size_t i = 0; i < events.size(); ++i) {
        InterventionEvent& e = events[i];
        std::vector<double> v;
        switch (mode) {
            case TextMode::kZero:
                v.assign(dim, 0.0);
                break;
            case TextMode::kRandom: {
                Rng r = base.split(i);
                v.resize(dim);
                for (double& x : v) x = r.normal();
                l2_normalize(v);
                break;
            }
            case TextMode::kGood: {
                const std::vector<double>* hit = store ? store->find(e.text) : nullptr;
                if (store && !hit && ++warned <= 5) {
                    std::fprintf(stderr, "warning: embedding store miss for \"%s\"; hashing\n",
                                 e.text.c_str());
                }
                v = hit ? *hit : embed_text_hash(e.text, dim);
                if (noise_sigma > 0.0 && l2_norm(v) > 0.0) {
                    Rng r = base.split(i);
                    const double s = noise_sigma / std::sqrt(static_cast<double>(dim));
                    for (double& x : v) x += s * r.normal();
                    l2_normalize(v);
                }
                break;
            }
        }
        e.embedding = std::move(v);
    }
}

void embed_descriptors(std::vector<ChannelDescriptor>& descriptors, size_t dim,
                       const EmbeddingStore* store, bool zero_desc) {
    for (ChannelDescriptor& d : descriptors) {
        if (zero_desc) {
            d.embedding.assign(dim, 0.0);
            continue;
        }
        const std::vector<double>* hit = store ? store->find(d.text) : nullptr;
        d.embedding = hit ? *hit : embed_text_hash(d.text, dim);
    }
}

WindowDataset build_windows(const Series& series,
                            std::shared_ptr<const std::vector<InterventionEvent>> events,
                            std::vector<ChannelDescriptor> descriptors,
                            const WindowBuildConfig& config, SplitPart part,
                            const NormStats* fixed_stats) {
    if (descriptors.size() != series.channels) {
        throw ValidationError("build_windows: one descriptor per channel required");
    }
    if (config.patch_stride > config.patch_len) {
        throw ValidationError("build_windows: patch_stride must be <= patch_len");
    }
    if (series.rows() < config.lookback + config.horizon) {
        throw ValidationError("build_windows: series too short");
    }

    WindowDataset ds;
    ds.lookback = config.lookback;
    ds.horizon = config.horizon;
    ds.channels = series.channels;
    ds.embed_dim = config.embed_dim;
    ds.m_max = config.m_max;
    ds.out_patch_len =
        config.out_patch_len ? config.out_patch_len : auto_out_patch_len(config.horizon);
    ds.n_future_patches = (config.horizon + ds.out_patch_len - 1) / ds.out_patch_len;
    ds.events = std::move(events);
    ds.descriptors = std::move(descriptors);

    ds.desc_matrix.assign(ds.channels * ds.embed_dim, 0.0);
    for (size_t c = 0; c < ds.channels; ++c) {
        const std::vector<double>& v = ds.descriptors[c].embedding;
        if (v.size() != ds.embed_dim) {
            throw DimensionError("build_windows: descriptor embedding dim mismatch");
        }
        std::copy(v.begin(), v.end(), ds.desc_matrix.begin() + c * ds.embed_dim);
    }

    SplitRanges split = chronological_split(series.rows(), config.split);
    ds.stats = fixed_stats ? *fixed_stats : normalize_fit(series, 0, split.train_end);

    Series normalized = series;
    normalize_apply(normalized, ds.stats);

    auto [begin, end] = split.range(part);
    std::vector<size_t> starts = make_windows(begin, end, config.lookback, config.horizon,
                                              config.stride);

    std::vector<size_t> hist_offsets =
        patch_offsets(config.lookback, config.patch_len, config.patch_stride);

    const size_t L = config.lookback, H = config.horizon, C = series.channels;
    ds.windows.reserve(starts.size());
    for (size_t t : starts) {
        AlignedWindow w;
        w.forecast_start = t;
        w.x_h.resize(L * C);
        w.x_f.resize(H * C);
        for (size_t i = 0; i < L; ++i)
            for (size_t c = 0; c < C; ++c) w.x_h[i * C + c] = normalized.at(t - L + i, c);
        for (size_t i = 0; i < H; ++i)
            for (size_t c = 0; c < C; ++c) w.x_f[i * C + c] = normalized.at(t + i, c);

        w.history_patch_starts.reserve(hist_offsets.size());
        for (size_t off : hist_offsets) {
            w.history_patch_starts.push_back(series.timestamps[t - L + off]);
        }
        w.future_patch_starts.reserve(ds.n_future_patches);
        for (size_t p = 0; p < ds.n_future_patches; ++p) {
            size_t idx = std::min(t + p * ds.out_patch_len, series.rows() - 1);
            w.future_patch_starts.push_back(series.timestamps[idx]);
        }

        w.news_future = build_news_slab(*ds.events, w.future_patch_starts, config.m_max,
                                        config.embed_dim);
        if (config.history_news) {
            w.news_history = build_news_slab(*ds.events, w.history_patch_starts, config.m_max,
                                             config.embed_dim);
        }
        ds.windows.push_back(std::move(w));
    }
    return ds;
}

}  // namespace iatsf
