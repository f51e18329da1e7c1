#include "iatsf/fiats/train.hpp"

#include <cmath>

namespace iatsf::fiats {

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<Tensor>& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const Tensor& p : params) out.push_back(p.vec());
    return out;
}

void restore(std::vector<Tensor>& params, const std::vector<std::vector<double>>& snap) {
    for (size_t i = 0; i < params.size(); ++i) params[i].vec() = snap[i];
}

}  // namespace

double eval_mse(const FiatsModel& model, const WindowDataset& ds) {
    if (ds.windows.empty()) throw ValidationError("eval_mse: empty dataset");
    double acc = 0.0;
    for (const AlignedWindow& w : ds.windows) {
        Tensor pred = model.forward(ModelInput::from(ds, w));
        Tensor target = Tensor::from_data({ds.horizon, ds.channels}, std::vector<double>(w.x_f));
        acc += mse_loss(pred, target).item();
    }
    return acc / static_cast<double>(ds.windows.size());
}

std::vector<std::vector<double>> eval_per_window_channel_mse(const FiatsModel& model,
                                                             const WindowDataset& ds) {
    std::vector<std::vector<double>> out;
    out.reserve(ds.windows.size());
    for (const AlignedWindow& w : ds.windows) {
        Tensor pred = model.forward(ModelInput::from(ds, w));
        std::vector<double> per(ds.channels, 0.0);
        for (size_t i = 0; i < ds.horizon; ++i)
            for (size_t c = 0; c < ds.channels; ++c) {
                double d = pred(i, c) - w.x_f[i * ds.channels + c];
                per[c] += d * d;
            }
        for (double& v : per) v /= static_cast<double>(ds.horizon);
        out.push_back(std::move(per));
    }
    return out;
}

TrainResult train(FiatsModel& model, const WindowDataset& train_ds, const WindowDataset& val_ds,
                  TrainerState* state, bool restore_best) {
    if (train_ds.windows.empty() || val_ds.windows.empty()) {
        throw ValidationError("train: nonempty train and validation sets required");
    }
    const FiatsConfig& cfg = model.config();
    std::vector<Tensor>& params = model.params();

    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    AdamState adam(params, adam_cfg);

    TrainerState local;
    TrainerState& st = state ? *state : local;
    if (st.resuming()) {
        if (st.adam_m.size() != params.size()) {
            throw ValidationError("train: trainer state does not match model");
        }
        adam.moment1() = st.adam_m;
        adam.moment2() = st.adam_v;
        adam.set_step_count(st.adam_step);
    } else {
        st.best_val = std::numeric_limits<double>::infinity();
        st.best_params = snapshot(params);
    }

    TrainResult result;
    result.best_val = st.best_val;
    result.best_epoch = st.best_epoch;

    const size_t n = train_ds.windows.size();
    for (size_t epoch = st.next_epoch; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng = Rng(cfg.seed).split(3000 + epoch);
        Rng dropout_rng = Rng(cfg.seed).split(2000 + epoch);
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        for (size_t i = n; i > 1; --i) {
            size_t j = shuffle_rng.uniform_int(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < n; start += cfg.batch_size) {
            const size_t bsize = std::min(cfg.batch_size, n - start);
            model.zero_grads();
            for (size_t k = 0; k < bsize; ++k) {
                const AlignedWindow& w = train_ds.windows[order[start + k]];
                Graph graph;
                Tensor pred = model.forward(ModelInput::from(train_ds, w), nullptr,
                                            cfg.dropout > 0 ? &dropout_rng : nullptr);
                Tensor target = Tensor::from_data({cfg.horizon, cfg.channels},
                                                  std::vector<double>(w.x_f));
                Tensor loss = mse_loss(pred, target);
                const double lv = loss.item();
                if (!std::isfinite(lv)) {
                    throw TrainingError("training diverged (NaN loss) at epoch " +
                                        std::to_string(epoch) + "; last finite epoch " +
                                        (result.val_curve.empty()
                                             ? std::string("none")
                                             : std::to_string(epoch - 1)));
                }
                epoch_loss += lv;
                ++seen;
                graph.backward(loss);
            }
            for (Tensor& p : params) {
                std::vector<double>& g = p.grad_buffer();
                for (double& v : g) v /= static_cast<double>(bsize);
            }
            adam.step(params);
        }
        model.check_finite_params();

        result.train_curve.push_back(epoch_loss / static_cast<double>(seen));
        const double val = eval_mse(model, val_ds);
        result.val_curve.push_back(val);
        result.epochs_run = epoch + 1;

        if (val < st.best_val) {
            st.best_val = val;
            st.best_epoch = epoch;
            st.since_best = 0;
            st.best_params = snapshot(params);
        } else {
            ++st.since_best;
        }
        st.next_epoch = epoch + 1;
        st.adam_m = adam.moment1();
        st.adam_v = adam.moment2();
        st.adam_step = adam.step_count();
        if (st.since_best > cfg.patience) break;
    }

    result.best_val = st.best_val;
    result.best_epoch = st.best_epoch;
    if (restore_best) restore(params, st.best_params);
    return result;
}

}  // namespace iatsf::fiats
