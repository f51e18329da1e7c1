#include "iatsf/fiats/model.hpp"

#include <cmath>
#include <sstream>

namespace iatsf::fiats {

std::string FiatsConfig::canonical_text() const {
    std::ostringstream os;
    os << "patch_len=" << patch_len << "\npatch_stride=" << patch_stride
       << "\nd_model=" << d_model << "\nn_heads=" << n_heads
       << "\nencoder_layers=" << encoder_layers << "\ncasm_blocks=" << casm_blocks
       << "\ncasm_self_attn_layers=" << casm_self_attn_layers << "\ncaps_layers=" << caps_layers
       << "\nff_mult=" << ff_mult << "\ndropout=" << dropout << "\ninstance_norm=" << instance_norm
       << "\nuse_history_news=" << use_history_news << "\nembed_dim=" << embed_dim
       << "\nlookback=" << lookback << "\nhorizon=" << horizon
       << "\nout_patch_len=" << out_patch_len << "\nchannels=" << channels << "\nm_max=" << m_max
       << "\n";
    return os.str();
}

uint64_t FiatsConfig::config_hash() const {
    std::string t = canonical_text();
    return fnv1a64(t.data(), t.size());
}

namespace {

LinearLayer make_linear(size_t in, size_t out, Rng& rng, std::vector<Tensor>& params,
                        std::vector<std::string>& names, const std::string& name) {
    LinearLayer l;
    l.W = Tensor::rand_uniform({in, out}, rng, -1.0, true);
    l.b = Tensor::zeros({out}, true);
    params.push_back(l.W);
    names.push_back(name + ".W");
    params.push_back(l.b);
    names.push_back(name + ".b");
    return l;
}

Tensor make_ln_param(size_t dim, double value, std::vector<Tensor>& params,
                     std::vector<std::string>& names, const std::string& name) {
    Tensor t = Tensor::full({dim}, value, true);
    params.push_back(t);
    names.push_back(name);
    return t;
}

AttnBlock make_attn_block(size_t d, size_t ff, Rng& rng, std::vector<Tensor>& params,
                          std::vector<std::string>& names, const std::string& name) {
    AttnBlock blk;
    blk.ln1_g = make_ln_param(d, 1.0, params, names, name + ".ln1.g");
    blk.ln1_b = make_ln_param(d, 0.0, params, names, name + ".ln1.b");
    blk.wq = make_linear(d, d, rng, params, names, name + ".wq");
    blk.wk = make_linear(d, d, rng, params, names, name + ".wk");
    blk.wv = make_linear(d, d, rng, params, names, name + ".wv");
    blk.wo = make_linear(d, d, rng, params, names, name + ".wo");
    blk.ln2_g = make_ln_param(d, 1.0, params, names, name + ".ln2.g");
    blk.ln2_b = make_ln_param(d, 0.0, params, names, name + ".ln2.b");
    blk.ff1 = make_linear(d, ff, rng, params, names, name + ".ff1");
    blk.ff2 = make_linear(ff, d, rng, params, names, name + ".ff2");
    return blk;
}

Tensor linear(const Tensor& x, const LinearLayer& l) {
    return add_rowvec(matmul(x, l.W), l.b);
}

Tensor maybe_dropout(Tensor x, double p, Rng* rng) {
    if (rng && p > 0.0) return dropout(x, p, *rng);
    return x;
}

/// Pre-norm transformer block over the rows of x.
Tensor apply_attn_block(const AttnBlock& blk, Tensor x, size_t n_heads, double drop, Rng* rng) {
    Tensor normed = layer_norm(x, blk.ln1_g, blk.ln1_b);
    Tensor attn = multi_head_attention(linear(normed, blk.wq), linear(normed, blk.wk),
                                       linear(normed, blk.wv), n_heads, nullptr, nullptr);
    x = add(x, maybe_dropout(linear(attn, blk.wo), drop, rng));
    Tensor n2 = layer_norm(x, blk.ln2_g, blk.ln2_b);
    Tensor h = maybe_dropout(gelu(linear(n2, blk.ff1)), drop, rng);
    return add(x, linear(h, blk.ff2));
}

Tensor concat_rows_many(const std::vector<Tensor>& rows) {
    Tensor acc = rows[0];
    for (size_t i = 1; i < rows.size(); ++i) acc = concat_rows(acc, rows[i]);
    return acc;
}

}  // namespace

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, size_t n_heads,
                            const Tensor* forbid_mask, Tensor* avg_map) {
    const size_t d = q.cols();
    if (d % n_heads != 0) throw DimensionError("multi_head_attention: d not divisible by heads");
    if (k.cols() != d || v.cols() != d || k.rows() != v.rows()) {
        throw DimensionError("multi_head_attention: inconsistent k/v shapes");
    }
    const size_t dh = d / n_heads;
    const double scl = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Tensor> outs;
    outs.reserve(n_heads);
    Tensor map_acc;
    for (size_t h = 0; h < n_heads; ++h) {
        Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
        Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
        Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
        Tensor scores = scale(matmul(qh, transpose(kh)), scl);
        Tensor attn = forbid_mask ? masked_softmax(scores, *forbid_mask) : softmax(scores);
        outs.push_back(matmul(attn, vh));
        if (avg_map) map_acc = (h == 0) ? attn : add(map_acc, attn);
    }
    if (avg_map) *avg_map = scale(map_acc, 1.0 / static_cast<double>(n_heads));
    return concat_cols(outs);
}

FiatsModel::FiatsModel(FiatsConfig config, uint64_t init_seed) : config_(std::move(config)) {
    config_.validate();
    n_hist_patches_ =
        patch_offsets(config_.lookback, config_.patch_len, config_.patch_stride).size();
    out_patch_len_ =
        config_.out_patch_len ? config_.out_patch_len : auto_out_patch_len(config_.horizon);
    n_future_patches_ = (config_.horizon + out_patch_len_ - 1) / out_patch_len_;

    Rng rng(init_seed);
    const size_t d = config_.d_model;
    const size_t ff = config_.ff_mult * d;

    patch_proj_ = make_linear(config_.patch_len, d, rng, params_, param_names_, "patch_proj");
    pos_emb_ = Tensor::rand_uniform({n_hist_patches_, d}, rng, 0.02, true);
    params_.push_back(pos_emb_);
    param_names_.push_back("pos_emb");

    for (size_t l = 0; l < config_.encoder_layers; ++l) {
        encoder_.push_back(
            make_attn_block(d, ff, rng, params_, param_names_, "encoder." + std::to_string(l)));
    }

    desc_proj_ = make_linear(config_.embed_dim, d, rng, params_, param_names_, "desc_proj");
    for (size_t b = 0; b < config_.casm_blocks; ++b) {
        const std::string base = "casm." + std::to_string(b);
        CasmBlock blk;
        blk.ln_g = make_ln_param(d, 1.0, params_, param_names_, base + ".ln.g");
        blk.ln_b = make_ln_param(d, 0.0, params_, param_names_, base + ".ln.b");
        blk.wq = make_linear(d, d, rng, params_, param_names_, base + ".wq");
        blk.wk = make_linear(config_.embed_dim, d, rng, params_, param_names_, base + ".wk");
        blk.wv = make_linear(config_.embed_dim, d, rng, params_, param_names_, base + ".wv");
        blk.wo = make_linear(d, d, rng, params_, param_names_, base + ".wo");
        for (size_t s = 0; s < config_.casm_self_attn_layers; ++s) {
            blk.channel_attn.push_back(make_attn_block(
                d, ff, rng, params_, param_names_, base + ".chan." + std::to_string(s)));
        }
        casm_.push_back(std::move(blk));
    }

    future_pos_emb_ = Tensor::rand_uniform({n_future_patches_, d}, rng, 0.02, true);
    params_.push_back(future_pos_emb_);
    param_names_.push_back("future_pos_emb");

    for (size_t l = 0; l < config_.caps_layers; ++l) {
        caps_.push_back(
            make_attn_block(d, ff, rng, params_, param_names_, "caps." + std::to_string(l)));
    }

    head_ = make_linear(d, out_patch_len_, rng, params_, param_names_, "head");
}

size_t FiatsModel::scalar_count() const {
    size_t n = 0;
    for (const Tensor& p : params_) n += p.size();
    return n;
}

void FiatsModel::zero_grads() {
    for (Tensor& p : params_) p.zero_grad();
}

void FiatsModel::check_finite_params() const {
    for (size_t i = 0; i < params_.size(); ++i) {
        for (double v : params_[i].vec()) {
            if (!std::isfinite(v)) {
                throw TrainingError("non-finite parameter in " + param_names_[i]);
            }
        }
    }
}

std::vector<Tensor> FiatsModel::encode_history(const Tensor& x_h, Rng* dropout_rng) const {
    const size_t C = config_.channels;
    if (x_h.rows() != config_.lookback || x_h.cols() != C) {
        throw DimensionError("encode_history: expected [" + std::to_string(config_.lookback) +
                             " x " + std::to_string(C) + "] history");
    }
    std::vector<Tensor> latents;
    latents.reserve(C);
    for (size_t c = 0; c < C; ++c) {
        Tensor col = slice_cols(x_h, c, c + 1);
        Tensor patches = patchify(col, config_.patch_len, config_.patch_stride);
        Tensor tokens = add(linear(patches, patch_proj_), pos_emb_);
        for (const AttnBlock& blk : encoder_) {
            tokens = apply_attn_block(blk, tokens, config_.n_heads, config_.dropout, dropout_rng);
        }
        latents.push_back(tokens);
    }
    return latents;
}

Tensor FiatsModel::desc_tokens(const Tensor& desc_matrix) const {
    if (desc_matrix.rows() != config_.channels || desc_matrix.cols() != config_.embed_dim) {
        throw DimensionError("desc_tokens: descriptor matrix shape mismatch");
    }
    return linear(desc_matrix, desc_proj_);
}

Tensor FiatsModel::casm_forward(const Tensor& desc_toks, const Tensor& news_rows,
                                const Tensor& valid, std::vector<std::vector<Tensor>>* casm_maps,
                                size_t patch_index, Rng* dropout_rng) const {
    const size_t m = news_rows.rows();
    if (news_rows.cols() != config_.embed_dim || valid.size() != m) {
        throw DimensionError("casm_forward: news slab shape mismatch");
    }
    bool any_valid = false;
    std::vector<double> forbid_row(m);
    for (size_t j = 0; j < m; ++j) {
        forbid_row[j] = valid.at(j) != 0.0 ? 0.0 : 1.0;
        any_valid = any_valid || valid.at(j) != 0.0;
    }
    Tensor forbid = Tensor::from_data({1, m}, std::move(forbid_row));

    Tensor y = desc_toks;
    for (size_t b = 0; b < casm_.size(); ++b) {
        const CasmBlock& blk = casm_[b];
        if (any_valid) {
            Tensor nq = layer_norm(y, blk.ln_g, blk.ln_b);
            Tensor map;
            Tensor attn = multi_head_attention(linear(nq, blk.wq), linear(news_rows, blk.wk),
                                               linear(news_rows, blk.wv), config_.n_heads, &forbid,
                                               casm_maps ? &map : nullptr);
            y = add(y, maybe_dropout(linear(attn, blk.wo), config_.dropout, dropout_rng));
            if (casm_maps) (*casm_maps)[b][patch_index] = map;
        } else if (casm_maps) {
            // No unmasked key: cross-attention contributes nothing.
            (*casm_maps)[b][patch_index] = Tensor::zeros({config_.channels, m});
        }
        for (const AttnBlock& sa : blk.channel_attn) {
            y = apply_attn_block(sa, y, config_.n_heads, config_.dropout, dropout_rng);
        }
    }
    return y;
}

Tensor FiatsModel::caps_decode(const Tensor& future_tokens, const Tensor& history_latents,
                               std::vector<std::vector<Tensor>>* caps_maps, size_t channel,
                               Rng* dropout_rng) const {
    const size_t pf = future_tokens.rows(), ph = history_latents.rows();
    if (future_tokens.cols() != config_.d_model || history_latents.cols() != config_.d_model) {
        throw DimensionError("caps_decode: latent width mismatch");
    }
    // Causal mask: history keys always attendable; future key q forbidden for
    // query p when q > p.
    std::vector<double> forbid(pf * (ph + pf), 0.0);
    for (size_t p = 0; p < pf; ++p)
        for (size_t qk = p + 1; qk < pf; ++qk) forbid[p * (ph + pf) + ph + qk] = 1.0;
    Tensor mask = Tensor::from_data({pf, ph + pf}, std::move(forbid));

    Tensor y = future_tokens;
    for (size_t l = 0; l < caps_.size(); ++l) {
        const AttnBlock& blk = caps_[l];
        Tensor kv = concat_rows(history_latents, y);
        Tensor nq = layer_norm(y, blk.ln1_g, blk.ln1_b);
        Tensor nkv = layer_norm(kv, blk.ln1_g, blk.ln1_b);
        Tensor map;
        Tensor attn =
            multi_head_attention(linear(nq, blk.wq), linear(nkv, blk.wk), linear(nkv, blk.wv),
                                 config_.n_heads, &mask, caps_maps ? &map : nullptr);
        y = add(y, maybe_dropout(linear(attn, blk.wo), config_.dropout, dropout_rng));
        Tensor n2 = layer_norm(y, blk.ln2_g, blk.ln2_b);
        Tensor h = maybe_dropout(gelu(linear(n2, blk.ff1)), config_.dropout, dropout_rng);
        y = add(y, linear(h, blk.ff2));
        if (caps_maps) (*caps_maps)[l][channel] = map;
    }
    return y;
}

Tensor FiatsModel::tokenwise_head(const std::vector<Tensor>& future_latents) const {
    const size_t H = config_.horizon;
    if (n_future_patches_ * out_patch_len_ < H) {
        throw DimensionError("tokenwise_head: patches do not cover the horizon");
    }
    std::vector<Tensor> columns;
    columns.reserve(future_latents.size());
    for (const Tensor& lat : future_latents) {
        Tensor patches = linear(lat, head_);                       // [P_f x opl]
        Tensor flat = reshape(patches, {patches.size(), 1});       // tiled, non-overlapping
        columns.push_back(slice_rows(flat, 0, H));                 // trailing surplus truncated
    }
    return concat_cols(columns);  // [H x C]
}

Tensor FiatsModel::forward(const ModelInput& in, AttnMaps* maps, Rng* dropout_rng) const {
    const size_t L = config_.lookback, C = config_.channels, D = config_.embed_dim;
    const size_t M = config_.m_max, PF = n_future_patches_;
    if (!in.x_h || !in.desc || !in.news_future) {
        throw ValidationError("forward: missing inputs");
    }
    if (in.x_h->size() != L * C) throw DimensionError("forward: x_h size mismatch");
    if (in.desc->size() != C * D) throw DimensionError("forward: descriptor size mismatch");
    const NewsSlab& slab = *in.news_future;
    if (slab.n_patches != PF || slab.m_max != M || slab.dim != D) {
        throw DimensionError("forward: news slab shape mismatch");
    }

    // Optional per-window renormalization of the history scale.
    std::vector<double> inst_mean(C, 0.0), inst_std(C, 1.0);
    std::vector<double> xh_data = *in.x_h;
    if (config_.instance_norm) {
        for (size_t c = 0; c < C; ++c) {
            double m = 0.0;
            for (size_t i = 0; i < L; ++i) m += xh_data[i * C + c];
            m /= static_cast<double>(L);
            double v = 0.0;
            for (size_t i = 0; i < L; ++i) {
                double dlt = xh_data[i * C + c] - m;
                v += dlt * dlt;
            }
            v /= static_cast<double>(L);
            inst_mean[c] = m;
            inst_std[c] = std::max(std::sqrt(v), 1e-8);
            for (size_t i = 0; i < L; ++i) xh_data[i * C + c] = (xh_data[i * C + c] - m) / inst_std[c];
        }
    }
    Tensor x_h = Tensor::from_data({L, C}, std::move(xh_data));

    std::vector<Tensor> history = encode_history(x_h, dropout_rng);
    Tensor desc = desc_tokens(Tensor::from_data({C, D}, std::vector<double>(*in.desc)));

    if (maps) {
        maps->casm.assign(config_.casm_blocks, std::vector<Tensor>(PF));
        maps->caps.assign(config_.caps_layers, std::vector<Tensor>(C));
    }

    // Per-patch channel-aware intervention tokens.
    std::vector<Tensor> per_patch;
    per_patch.reserve(PF);
    for (size_t p = 0; p < PF; ++p) {
        std::vector<double> rows(M * D), valid(M);
        for (size_t m = 0; m < M; ++m) {
            const double* v = slab.slot(p, m);
            std::copy(v, v + D, rows.begin() + m * D);
            valid[m] = slab.valid_at(p, m);
        }
        per_patch.push_back(casm_forward(desc, Tensor::from_data({M, D}, std::move(rows)),
                                         Tensor::from_data({M}, std::move(valid)),
                                         maps ? &maps->casm : nullptr, p, dropout_rng));
    }

    std::vector<Tensor> outputs;
    outputs.reserve(C);
    for (size_t c = 0; c < C; ++c) {
        std::vector<Tensor> token_rows;
        token_rows.reserve(PF);
        for (size_t p = 0; p < PF; ++p) token_rows.push_back(slice_rows(per_patch[p], c, c + 1));
        Tensor future_tokens = add(concat_rows_many(token_rows), future_pos_emb_);
        outputs.push_back(caps_decode(future_tokens, history[c], maps ? &maps->caps : nullptr, c,
                                      dropout_rng));
    }
    Tensor pred = tokenwise_head(outputs);

    if (config_.instance_norm) {
        const size_t H = config_.horizon;
        std::vector<double> s(H * C), m(H * C);
        for (size_t i = 0; i < H; ++i)
            for (size_t c = 0; c < C; ++c) {
                s[i * C + c] = inst_std[c];
                m[i * C + c] = inst_mean[c];
            }
        pred = add(mul(pred, Tensor::from_data({H, C}, std::move(s))),
                   Tensor::from_data({H, C}, std::move(m)));
    }
    return pred;
}

}  // namespace iatsf::fiats
