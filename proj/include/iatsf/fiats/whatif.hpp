#pragma once

#include "iatsf/fiats/model.hpp"

namespace iatsf::fiats {

/// An edit to the intervention stream for counterfactual inference. Edits may
/// only touch events at or after the window's forecast start; earlier edits
/// are rejected to keep evaluation leak-free.
struct EventEdit {
    enum class Kind { kSwap, kSet };
    Kind kind = Kind::kSwap;
    int64_t t1 = 0;
    int64_t t2 = 0;     // kSwap only
    std::string text;   // kSet only
};

/// Applies the edits to a copy of the dataset's event list (swapping or
/// replacing text + embedding), re-runs temporal alignment for the window's
/// future patches, and runs the forward pass. The original window and dataset
/// are untouched. `edited_slab_out`, when set, receives the realigned slab.
Tensor predict_what_if(const FiatsModel& model, const WindowDataset& ds, size_t window_index,
                       const std::vector<EventEdit>& edits, NewsSlab* edited_slab_out = nullptr,
                       AttnMaps* maps = nullptr);

}  // namespace iatsf::fiats
