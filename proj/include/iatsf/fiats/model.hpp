#pragma once

#include <string>
#include <vector>

#include "iatsf/dataio.hpp"
#include "iatsf/fiats/config.hpp"
#include "iatsf/ops.hpp"

namespace iatsf::fiats {

/// Inputs the forecaster is allowed to see. Deliberately excludes the future
/// targets: predictions are a function of history, descriptors, and synced
/// news only.
struct ModelInput {
    const std::vector<double>* x_h = nullptr;       // [L * C], normalized
    const std::vector<double>* desc = nullptr;      // [C * D]
    const NewsSlab* news_future = nullptr;
    const NewsSlab* news_history = nullptr;         // optional

    static ModelInput from(const WindowDataset& ds, const AlignedWindow& w) {
        return {&w.x_h, &ds.desc_matrix, &w.news_future,
                w.news_history.n_patches ? &w.news_history : nullptr};
    }
};

/// Row-stochastic attention maps captured during a forward pass.
struct AttnMaps {
    // casm[block][future_patch]: [C x M_max], zeros where slots are padded.
    std::vector<std::vector<Tensor>> casm;
    // caps[layer][channel]: [P_f x (P_h + P_f)], exact zeros on masked keys.
    std::vector<std::vector<Tensor>> caps;
};

struct LinearLayer {
    Tensor W, b;
};

struct AttnBlock {
    Tensor ln1_g, ln1_b;
    LinearLayer wq, wk, wv, wo;
    Tensor ln2_g, ln2_b;
    LinearLayer ff1, ff2;
};

struct CasmBlock {
    Tensor ln_g, ln_b;       // query-stream norm before cross-attention
    LinearLayer wq;          // d -> d
    LinearLayer wk, wv;      // D -> d
    LinearLayer wo;          // d -> d
    std::vector<AttnBlock> channel_attn;  // self-attention over the channel axis
};

class FiatsModel {
public:
    FiatsModel(FiatsConfig config, uint64_t init_seed);

    const FiatsConfig& config() const { return config_; }
    size_t n_hist_patches() const { return n_hist_patches_; }
    size_t n_future_patches() const { return n_future_patches_; }
    size_t out_patch_len() const { return out_patch_len_; }

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    const std::vector<std::string>& param_names() const { return param_names_; }
    size_t scalar_count() const;
    void zero_grads();
    void check_finite_params() const;

    /// Full forward pass: patchify -> encode_history -> casm -> caps -> head.
    /// Returns the [H x C] prediction on the normalized scale.
    Tensor forward(const ModelInput& in, AttnMaps* maps = nullptr,
                   Rng* dropout_rng = nullptr) const;

    /// Shared-weight patch encoder; returns per-channel latents [P_h x d].
    std::vector<Tensor> encode_history(const Tensor& x_h, Rng* dropout_rng = nullptr) const;

    /// Channel-aware intervention tokens for one future patch.
    /// news_rows: [M_max x D]; valid: [M_max] (1 = real event).
    /// Returns [C x d]; per-block [C x M_max] maps appended to casm_maps.
    Tensor casm_forward(const Tensor& desc_tokens, const Tensor& news_rows, const Tensor& valid,
                        std::vector<std::vector<Tensor>>* casm_maps, size_t patch_index,
                        Rng* dropout_rng = nullptr) const;

    /// Causal alignment decoder for one channel: queries are the future
    /// intervention tokens [P_f x d], keys/values the history latents plus
    /// earlier future tokens under a causal mask.
    Tensor caps_decode(const Tensor& future_tokens, const Tensor& history_latents,
                       std::vector<std::vector<Tensor>>* caps_maps, size_t channel,
                       Rng* dropout_rng = nullptr) const;

    /// One shared linear map d -> out_patch_len, tiled without overlap and
    /// truncated to the horizon. future_latents: per-channel [P_f x d].
    Tensor tokenwise_head(const std::vector<Tensor>& future_latents) const;

private:
    Tensor desc_tokens(const Tensor& desc_matrix) const;
    void register_params();

    FiatsConfig config_;
    size_t n_hist_patches_ = 0, n_future_patches_ = 0, out_patch_len_ = 0;

    LinearLayer patch_proj_;
    Tensor pos_emb_;         // [P_h x d]
    std::vector<AttnBlock> encoder_;
    LinearLayer desc_proj_;  // D -> d
    std::vector<CasmBlock> casm_;
    Tensor future_pos_emb_;  // [P_f x d]
    std::vector<AttnBlock> caps_;
    LinearLayer head_;       // d -> out_patch_len

    std::vector<Tensor> params_;
    std::vector<std::string> param_names_;
};

/// Multi-head attention over already-projected q/k/v with optional forbid
/// mask (1 = masked). Returns the concatenated head outputs [nq x d]; if
/// avg_map is set it receives the head-averaged row-stochastic map.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, size_t n_heads,
                            const Tensor* forbid_mask, Tensor* avg_map);

}  // namespace iatsf::fiats
