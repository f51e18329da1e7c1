#pragma once

#include <cstdint>
#include <string>

#include "iatsf/errors.hpp"

namespace iatsf::fiats {

struct FiatsConfig {
    size_t patch_len = 16;
    size_t patch_stride = 8;
    size_t d_model = 48;
    size_t n_heads = 4;
    size_t encoder_layers = 2;
    size_t casm_blocks = 3;
    size_t casm_self_attn_layers = 1;
    size_t caps_layers = 2;
    size_t ff_mult = 2;           // feed-forward width = ff_mult * d_model
    double dropout = 0.0;
    double lr = 1e-3;
    size_t epochs = 20;
    size_t batch_size = 32;
    size_t patience = 6;
    uint64_t seed = 1;
    bool instance_norm = false;   // per-window renormalization, off by default
    bool use_history_news = false;
    size_t embed_dim = 64;
    size_t lookback = 60;
    size_t horizon = 14;
    size_t out_patch_len = 0;     // 0 = auto
    size_t channels = 1;
    size_t m_max = 4;

    void validate() const {
        if (d_model % n_heads != 0) {
            throw ValidationError("FiatsConfig: d_model must be divisible by n_heads");
        }
        if (patch_stride > patch_len) {
            throw ValidationError("FiatsConfig: patch_stride must be <= patch_len");
        }
        if (casm_blocks < 1) throw ValidationError("FiatsConfig: casm_blocks must be >= 1");
        if (lookback < patch_len) {
            throw ValidationError("FiatsConfig: lookback must be >= patch_len");
        }
        if (horizon == 0 || channels == 0 || embed_dim == 0) {
            throw ValidationError("FiatsConfig: zero-sized field");
        }
        if (dropout < 0.0 || dropout >= 1.0) {
            throw ValidationError("FiatsConfig: dropout must be in [0, 1)");
        }
    }

    /// Canonical text echo embedded in checkpoints; hashing it ties reports
    /// and checkpoints to the exact architecture.
    std::string canonical_text() const;
    uint64_t config_hash() const;
};

}  // namespace iatsf::fiats
