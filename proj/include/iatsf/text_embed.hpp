#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "iatsf/errors.hpp"
#include "iatsf/rng.hpp"

namespace iatsf {

/// Deterministic signed feature hashing: lowercase, split on
/// non-alphanumerics, hash each token into one of D buckets with a +/-1 sign
/// from an independent hash stream, accumulate, L2-normalize. Empty text maps
/// to the zero vector (the null embedding, flagged downstream by the mask).
std::vector<double> embed_text_hash(const std::string& text, size_t dim);

double l2_norm(const std::vector<double>& v);
void l2_normalize(std::vector<double>& v);

/// Plain-text store of precomputed text embeddings. Format: first line
/// "dim <D>", then one row per entry: "<id-hex>\t<text>\t<f1,f2,...>".
/// Vectors are renormalized to unit norm on load.
class EmbeddingStore {
public:
    explicit EmbeddingStore(size_t dim) : dim_(dim) {}

    static EmbeddingStore load(const std::string& path);
    void save(const std::string& path) const;

    void put(const std::string& text, std::vector<double> vec);
    /// nullptr on miss; callers fall back to embed_text_hash.
    const std::vector<double>* find(const std::string& text) const;

    size_t dim() const { return dim_; }
    size_t size() const { return entries_.size(); }

private:
    struct Entry {
        std::string text;
        std::vector<double> vec;
    };
    size_t dim_;
    std::unordered_map<uint64_t, Entry> entries_;  // keyed by text hash
};

}  // namespace iatsf
