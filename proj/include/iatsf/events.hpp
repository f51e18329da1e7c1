#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iatsf {

/// One timestamped piece of intervention text; the embedding slot is filled
/// either from a precomputed store or by the hash featurizer. Timestamps are
/// step indices for synthetic data (epoch seconds for real feeds).
struct InterventionEvent {
    int64_t timestamp = 0;
    std::string text;
    std::optional<std::vector<double>> embedding;  // unit norm when present
};

/// Textual description of one series channel, used as the sensitivity query.
struct ChannelDescriptor {
    size_t channel_index = 0;
    std::string text;
    std::vector<double> embedding;  // unit norm
};

}  // namespace iatsf
