#include "iatsf/fiats/whatif.hpp"

#include <algorithm>

namespace iatsf::fiats {

namespace {

size_t find_event(const std::vector<InterventionEvent>& events, int64_t t) {
    auto it = std::lower_bound(events.begin(), events.end(), t,
                               [](const InterventionEvent& e, int64_t v) { return e.timestamp < v; });
    if (it == events.end() || it->timestamp != t) {
        throw ValidationError("predict_what_if: no event at timestamp " + std::to_string(t));
    }
    return static_cast<size_t>(it - events.begin());
}

}  // namespace

Tensor predict_what_if(const FiatsModel& model, const WindowDataset& ds, size_t window_index,
                       const std::vector<EventEdit>& edits, NewsSlab* edited_slab_out,
                       AttnMaps* maps) {
    if (window_index >= ds.windows.size()) {
        throw ValidationError("predict_what_if: window index out of range");
    }
    const AlignedWindow& w = ds.windows[window_index];
    const int64_t forecast_start_time = w.future_patch_starts.front();

    for (const EventEdit& e : edits) {
        if (e.t1 < forecast_start_time ||
            (e.kind == EventEdit::Kind::kSwap && e.t2 < forecast_start_time)) {
            throw ValidationError(
                "predict_what_if: edit targets a history patch (leak protection)");
        }
    }

    ModelInput in = ModelInput::from(ds, w);
    NewsSlab edited;
    if (!edits.empty()) {
        std::vector<InterventionEvent> events = *ds.events;
        for (const EventEdit& e : edits) {
            if (e.kind == EventEdit::Kind::kSwap) {
                size_t a = find_event(events, e.t1);
                size_t b = find_event(events, e.t2);
                std::swap(events[a].text, events[b].text);
                std::swap(events[a].embedding, events[b].embedding);
            } else {
                size_t a = find_event(events, e.t1);
                events[a].text = e.text;
                events[a].embedding = embed_text_hash(e.text, ds.embed_dim);
            }
        }
        edited = build_news_slab(events, w.future_patch_starts, ds.m_max, ds.embed_dim);
        in.news_future = &edited;
    }
    if (edited_slab_out && !edits.empty()) *edited_slab_out = edited;
    if (edited_slab_out && edits.empty()) *edited_slab_out = w.news_future;
    return model.forward(in, maps);
}

}  // namespace iatsf::fiats
