#include "iatsf/harness/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>

#include "iatsf/fiats/train.hpp"
#include "iatsf/io.hpp"

namespace iatsf::harness {

namespace fs = std::filesystem;
using fiats::FiatsModel;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir);
}

std::string mode_name(TextMode m) {
    switch (m) {
        case TextMode::kGood: return "good";
        case TextMode::kZero: return "zero";
        case TextMode::kRandom: return "random";
    }
    return "?";
}

uint64_t file_hash(const std::string& path) {
    std::string content = read_text_file(path);
    return fnv1a64(content.data(), content.size());
}

}  // namespace

std::string MetricsReport::to_json() const {
    json j;
    j["horizon"] = horizon;
    j["n_windows"] = n_windows;
    j["mse_per_channel"] = mse_per_channel;
    j["mae_per_channel"] = mae_per_channel;
    j["denorm_mae_per_channel"] = denorm_mae_per_channel;
    j["mse_avg"] = mse_avg;
    j["mae_avg"] = mae_avg;
    j["denorm_mae_avg"] = denorm_mae_avg;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["wall_time_s"] = wall_time_s;
    return j.dump(2);
}

MaterializedData load_or_generate(const ExperimentConfig& config) {
    MaterializedData data;
    if (config.dataset_kind == "fm_toy") {
        data.toy = generate_fm_toy(config.toy);
        data.has_toy = true;
        data.series.channels = 1;
        data.series.timestamps.resize(config.toy.n_steps);
        for (size_t t = 0; t < config.toy.n_steps; ++t) {
            data.series.timestamps[t] = static_cast<int64_t>(t);
        }
        data.series.data = data.toy.values;
        data.raw_events = data.toy.events;
        data.raw_descriptors = {{0, fm_channel_descriptor_text(), {}}};
    } else if (config.dataset_kind == "csv") {
        if (config.series_csv.empty() || config.events_tsv.empty() ||
            config.descriptors_tsv.empty()) {
            throw ValidationError("csv dataset requires series_csv, events_tsv, descriptors_tsv");
        }
        data.series = read_series_csv(config.series_csv);
        data.raw_events = read_events_tsv(config.events_tsv);
        data.raw_descriptors = read_descriptors_tsv(config.descriptors_tsv);
    } else {
        throw ValidationError("unknown dataset kind '" + config.dataset_kind + "'");
    }
    return data;
}

PreparedSplits prepare_splits(const MaterializedData& data, const ExperimentConfig& config,
                              size_t horizon, TextMode train_mode, TextMode test_mode,
                              double test_noise_sigma, bool zero_desc) {
    std::unique_ptr<EmbeddingStore> store;
    if (!config.embedding_store.empty()) {
        store = std::make_unique<EmbeddingStore>(EmbeddingStore::load(config.embedding_store));
        if (store->dim() != config.model.embed_dim) {
            throw FormatError("embedding store dim does not match model embed_dim");
        }
    }

    auto embed = [&](TextMode mode, double sigma, uint64_t stream) {
        std::vector<InterventionEvent> events = data.raw_events;
        embed_events(events, config.model.embed_dim, store.get(), mode,
                     Rng(config.seed).split(stream).seed(), sigma);
        return std::make_shared<const std::vector<InterventionEvent>>(std::move(events));
    };
    auto train_events = embed(train_mode, 0.0, 11);
    auto test_events = embed(test_mode, test_noise_sigma, 12);

    std::vector<ChannelDescriptor> descs = data.raw_descriptors;
    embed_descriptors(descs, config.model.embed_dim, store.get(), zero_desc);

    WindowBuildConfig wcfg;
    wcfg.lookback = config.lookback;
    wcfg.horizon = horizon;
    wcfg.patch_len = config.model.patch_len;
    wcfg.patch_stride = config.model.patch_stride;
    wcfg.out_patch_len = config.model.out_patch_len;
    wcfg.m_max = config.m_max;
    wcfg.embed_dim = config.model.embed_dim;
    wcfg.history_news = config.model.use_history_news;
    wcfg.split = config.split;

    PreparedSplits out;
    wcfg.stride = config.train_stride;
    out.train = build_windows(data.series, train_events, descs, wcfg, SplitPart::kTrain);
    out.val = build_windows(data.series, train_events, descs, wcfg, SplitPart::kVal);
    wcfg.stride = config.eval_stride;
    out.test = build_windows(data.series, test_events, descs, wcfg, SplitPart::kTest);
    return out;
}

MetricsReport evaluate(const FiatsModel& model, const WindowDataset& ds, uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    const size_t C = ds.channels, H = ds.horizon;
    MetricsReport rep;
    rep.horizon = H;
    rep.n_windows = ds.windows.size();
    rep.seed = seed;
    rep.config_hash = model.config().config_hash();
    rep.mse_per_channel.assign(C, 0.0);
    rep.mae_per_channel.assign(C, 0.0);
    for (const AlignedWindow& w : ds.windows) {
        Tensor pred = model.forward(fiats::ModelInput::from(ds, w));
        for (size_t i = 0; i < H; ++i)
            for (size_t c = 0; c < C; ++c) {
                double d = pred(i, c) - w.x_f[i * C + c];
                rep.mse_per_channel[c] += d * d;
                rep.mae_per_channel[c] += std::fabs(d);
            }
    }
    const double denom = static_cast<double>(rep.n_windows * H);
    rep.denorm_mae_per_channel.assign(C, 0.0);
    for (size_t c = 0; c < C; ++c) {
        rep.mse_per_channel[c] /= denom;
        rep.mae_per_channel[c] /= denom;
        rep.denorm_mae_per_channel[c] = rep.mae_per_channel[c] * ds.stats.stddev[c];
        rep.mse_avg += rep.mse_per_channel[c];
        rep.mae_avg += rep.mae_per_channel[c];
        rep.denorm_mae_avg += rep.denorm_mae_per_channel[c];
    }
    rep.mse_avg /= static_cast<double>(C);
    rep.mae_avg /= static_cast<double>(C);
    rep.denorm_mae_avg /= static_cast<double>(C);
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

GenerateResult cmd_generate(const ExperimentConfig& config) {
    ensure_dir(config.out_dir);
    MaterializedData data = load_or_generate(config);
    GenerateResult r;
    r.series_path = config.out_dir + "/series.csv";
    r.events_path = config.out_dir + "/events.tsv";
    r.descriptors_path = config.out_dir + "/descriptors.tsv";
    r.manifest_path = config.out_dir + "/manifest.json";
    write_series_csv(r.series_path, data.series);
    write_events_tsv(r.events_path, data.raw_events);
    write_descriptors_tsv(r.descriptors_path, data.raw_descriptors);

    json manifest;
    manifest["seed"] = config.seed;
    manifest["dataset_kind"] = config.dataset_kind;
    manifest["n_steps"] = data.series.rows();
    manifest["channels"] = data.series.channels;
    manifest["experiment_hash"] = config.experiment_hash();
    manifest["series_hash"] = file_hash(r.series_path);
    manifest["events_hash"] = file_hash(r.events_path);
    manifest["descriptors_hash"] = file_hash(r.descriptors_path);
    write_text_file(r.manifest_path, manifest.dump(2) + "\n");
    return r;
}

namespace {

TextMode effective_train_mode(const ExperimentConfig& c) {
    return c.zero_news ? TextMode::kZero : c.text_mode_train;
}
TextMode effective_test_mode(const ExperimentConfig& c) {
    return c.zero_news ? TextMode::kZero : c.text_mode_test;
}

TrainOutcome train_one(const ExperimentConfig& config, const MaterializedData& data,
                       size_t horizon, TextMode train_mode, const std::string& tag,
                       const std::string& resume_from) {
    PreparedSplits splits = prepare_splits(data, config, horizon, train_mode,
                                           effective_test_mode(config), config.noise_sigma,
                                           config.zero_desc);
    fiats::FiatsConfig mcfg = config.model_for(horizon, splits.train.channels);

    TrainOutcome out;
    out.horizon = horizon;
    out.checkpoint_path = config.out_dir + "/fiats_" + tag + ".ck";
    out.last_checkpoint_path = config.out_dir + "/fiats_" + tag + "_last.ck";
    out.loss_csv_path = config.out_dir + "/loss_" + tag + ".csv";

    fiats::TrainerState state;
    auto model = std::make_unique<FiatsModel>(mcfg, mcfg.seed);
    if (!resume_from.empty()) {
        // The checkpoint pins the architecture; the experiment config drives
        // the remaining epoch budget and optimizer settings.
        FiatsModel loaded = fiats::load_checkpoint(resume_from, &state);
        if (loaded.config().config_hash() != mcfg.config_hash()) {
            throw ValidationError("resume checkpoint config does not match this experiment");
        }
        for (size_t i = 0; i < model->params().size(); ++i) {
            model->params()[i].vec() = loaded.params()[i].vec();
        }
    }
    out.result = fiats::train(*model, splits.train, splits.val, &state, /*restore_best=*/false);

    // The resumable checkpoint keeps the last-epoch parameters; the published
    // one carries the best-validation parameters.
    fiats::save_checkpoint(out.last_checkpoint_path, *model, &state);
    for (size_t i = 0; i < model->params().size(); ++i) {
        model->params()[i].vec() = state.best_params[i];
    }
    fiats::save_checkpoint(out.checkpoint_path, *model);

    std::vector<std::vector<double>> rows;
    for (size_t e = 0; e < out.result.train_curve.size(); ++e) {
        rows.push_back({static_cast<double>(state.next_epoch - out.result.train_curve.size() + e),
                        out.result.train_curve[e], out.result.val_curve[e]});
    }
    write_csv(out.loss_csv_path, "epoch,train_mse,val_mse", rows);
    return out;
}

}  // namespace

std::vector<TrainOutcome> cmd_train(const ExperimentConfig& config,
                                    const std::string& resume_from) {
    ensure_dir(config.out_dir);
    MaterializedData data = load_or_generate(config);
    std::vector<TrainOutcome> outcomes;
    for (size_t horizon : config.horizons) {
        std::string tag = "h" + std::to_string(horizon);
        if (effective_train_mode(config) != TextMode::kGood) {
            tag += "_" + mode_name(effective_train_mode(config));
        }
        outcomes.push_back(
            train_one(config, data, horizon, effective_train_mode(config), tag, resume_from));
    }
    return outcomes;
}

std::vector<MetricsReport> cmd_eval(const ExperimentConfig& config,
                                    const std::vector<std::string>& checkpoints, SplitPart part) {
    ensure_dir(config.out_dir);
    MaterializedData data = load_or_generate(config);
    std::vector<MetricsReport> reports;
    for (const std::string& path : checkpoints) {
        FiatsModel model = fiats::load_checkpoint(path);
        const size_t horizon = model.config().horizon;
        fiats::FiatsConfig expected = config.model_for(horizon, model.config().channels);
        if (expected.config_hash() != model.config().config_hash()) {
            throw ValidationError("checkpoint " + path +
                                  " does not match this experiment's model config");
        }
        PreparedSplits splits =
            prepare_splits(data, config, horizon, effective_train_mode(config),
                           effective_test_mode(config), config.noise_sigma, config.zero_desc);
        const WindowDataset& ds = part == SplitPart::kTest  ? splits.test
                                  : part == SplitPart::kVal ? splits.val
                                                            : splits.train;
        MetricsReport rep = evaluate(model, ds, config.seed);
        reports.push_back(rep);
        std::string tag = "h" + std::to_string(horizon);
        write_text_file(config.out_dir + "/metrics_" + tag + ".json", rep.to_json() + "\n");
        std::vector<std::vector<double>> rows;
        for (size_t c = 0; c < rep.mse_per_channel.size(); ++c) {
            rows.push_back({static_cast<double>(horizon), static_cast<double>(c),
                            rep.mse_per_channel[c], rep.mae_per_channel[c],
                            rep.denorm_mae_per_channel[c]});
        }
        rows.push_back({static_cast<double>(horizon), -1.0, rep.mse_avg, rep.mae_avg,
                        rep.denorm_mae_avg});
        write_csv(config.out_dir + "/metrics_" + tag + ".csv",
                  "horizon,channel,mse,mae,denorm_mae", rows);
    }
    return reports;
}

AblateResult cmd_ablate(const ExperimentConfig& config) {
    ensure_dir(config.out_dir);
    MaterializedData data = load_or_generate(config);
    const size_t horizon = config.horizons.front();
    const std::vector<TextMode> modes = {TextMode::kGood, TextMode::kZero, TextMode::kRandom};

    // One training per train-mode; cells share the seed and differ only in
    // their text streams.
    auto train_cell = [&](TextMode train_mode) {
        PreparedSplits splits = prepare_splits(data, config, horizon, train_mode, train_mode, 0.0,
                                               config.zero_desc);
        fiats::FiatsConfig mcfg = config.model_for(horizon, splits.train.channels);
        auto model = std::make_unique<FiatsModel>(mcfg, mcfg.seed);
        fiats::train(*model, splits.train, splits.val);
        return model;
    };
    std::vector<std::future<std::unique_ptr<FiatsModel>>> futures;
    futures.reserve(modes.size());
    for (TextMode m : modes) {
        futures.push_back(std::async(std::launch::async, train_cell, m));
    }
    std::vector<std::unique_ptr<FiatsModel>> models;
    models.reserve(modes.size());
    for (auto& f : futures) models.push_back(f.get());

    AblateResult result;
    std::ofstream grid(config.out_dir + "/ablation_grid.csv");
    grid.precision(17);
    if (!grid) throw IoError("cannot write ablation_grid.csv");
    grid << "train_mode,test_mode,mse\n";
    for (size_t ti = 0; ti < modes.size(); ++ti) {
        for (TextMode test_mode : modes) {
            PreparedSplits splits = prepare_splits(data, config, horizon, modes[ti], test_mode,
                                                   0.0, config.zero_desc);
            MetricsReport rep = evaluate(*models[ti], splits.test, config.seed);
            result.text_grid.emplace_back(mode_name(modes[ti]), mode_name(test_mode), rep.mse_avg);
            grid << mode_name(modes[ti]) << ',' << mode_name(test_mode) << ',' << rep.mse_avg
                 << "\n";
        }
    }

    // Noise sweep on the good-text model; random unit-norm noise is added to
    // the test-side news embeddings and renormalized.
    std::ofstream sweep(config.out_dir + "/noise_sweep.csv");
    sweep.precision(17);
    if (!sweep) throw IoError("cannot write noise_sweep.csv");
    sweep << "sigma,mse\n";
    for (double sigma : config.noise_grid) {
        PreparedSplits splits = prepare_splits(data, config, horizon, TextMode::kGood,
                                               TextMode::kGood, sigma, config.zero_desc);
        MetricsReport rep = evaluate(*models[0], splits.test, config.seed);
        result.noise_sweep.emplace_back(sigma, rep.mse_avg);
        sweep << sigma << ',' << rep.mse_avg << "\n";
    }
    {
        PreparedSplits splits = prepare_splits(data, config, horizon, TextMode::kZero,
                                               TextMode::kZero, 0.0, config.zero_desc);
        MetricsReport rep = evaluate(*models[1], splits.test, config.seed);
        result.baseline_mse = rep.mse_avg;
        sweep << "baseline_zero_news," << rep.mse_avg << "\n";
    }
    return result;
}

WhatIfResult cmd_whatif(const ExperimentConfig& config, const std::string& checkpoint,
                        size_t window_id, const std::vector<fiats::EventEdit>& edits) {
    ensure_dir(config.out_dir);
    MaterializedData data = load_or_generate(config);
    FiatsModel model = fiats::load_checkpoint(checkpoint);
    const size_t horizon = model.config().horizon;
    PreparedSplits splits =
        prepare_splits(data, config, horizon, effective_train_mode(config),
                       effective_test_mode(config), config.noise_sigma, config.zero_desc);
    const WindowDataset& ds = splits.test;
    if (window_id >= ds.windows.size()) {
        throw ValidationError("whatif: window id out of range (test split has " +
                              std::to_string(ds.windows.size()) + " windows)");
    }

    WhatIfResult out;
    Tensor base = model.forward(fiats::ModelInput::from(ds, ds.windows[window_id]));
    Tensor edited = fiats::predict_what_if(model, ds, window_id, edits);
    out.baseline_prediction = base.vec();
    out.edited_prediction = edited.vec();

    const AlignedWindow& w = ds.windows[window_id];
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < horizon; ++i) {
        std::vector<double> row = {static_cast<double>(w.forecast_start + i)};
        for (size_t c = 0; c < ds.channels; ++c) row.push_back(base(i, c));
        for (size_t c = 0; c < ds.channels; ++c) row.push_back(edited(i, c));
        for (size_t c = 0; c < ds.channels; ++c) row.push_back(w.x_f[i * ds.channels + c]);
        rows.push_back(std::move(row));
    }
    out.prediction_csv_path = config.out_dir + "/whatif_w" + std::to_string(window_id) + ".csv";
    std::string header = "step";
    for (const char* kind : {"pred", "pred_edited", "target"}) {
        for (size_t c = 0; c < ds.channels; ++c) {
            header += "," + std::string(kind) + "_ch" + std::to_string(c);
        }
    }
    write_csv(out.prediction_csv_path, header, rows);

    // Toy oracle comparison for a single swap edit.
    if (data.has_toy && edits.size() == 1 && edits[0].kind == fiats::EventEdit::Kind::kSwap) {
        int64_t ta = edits[0].t1, tq = edits[0].t2;
        if (!parse_fm_caption(data.toy.events[static_cast<size_t>(ta)].text)) std::swap(ta, tq);
        SwapOracle oracle = swap_oracle(data.toy, ds, window_id, ta, tq);
        out.has_oracle = true;
        out.affected_begin = oracle.affected_begin;
        double se_sw = 0.0, se_or = 0.0;
        size_t n = 0;
        for (size_t i = oracle.affected_begin; i < horizon; ++i) {
            double pred_raw = denormalize_value(edited(i, 0), ds.stats, 0);
            se_sw += (pred_raw - oracle.swapped[i]) * (pred_raw - oracle.swapped[i]);
            se_or += (pred_raw - oracle.original[i]) * (pred_raw - oracle.original[i]);
            ++n;
        }
        out.mse_vs_swapped_oracle = se_sw / static_cast<double>(n);
        out.mse_vs_original_oracle = se_or / static_cast<double>(n);
        json j;
        j["window"] = window_id;
        j["affected_begin"] = out.affected_begin;
        j["mse_vs_swapped_oracle"] = out.mse_vs_swapped_oracle;
        j["mse_vs_original_oracle"] = out.mse_vs_original_oracle;
        write_text_file(config.out_dir + "/whatif_w" + std::to_string(window_id) + ".json",
                        j.dump(2) + "\n");
    }
    return out;
}

AttnResult cmd_attn(const ExperimentConfig& config, const std::string& checkpoint,
                    size_t window_id) {
    ensure_dir(config.out_dir);
    MaterializedData data = load_or_generate(config);
    FiatsModel model = fiats::load_checkpoint(checkpoint);
    PreparedSplits splits = prepare_splits(data, config, model.config().horizon,
                                           effective_train_mode(config),
                                           effective_test_mode(config), config.noise_sigma,
                                           config.zero_desc);
    const WindowDataset& ds = splits.test;
    if (window_id >= ds.windows.size()) throw ValidationError("attn: window id out of range");

    fiats::AttnMaps maps;
    model.forward(fiats::ModelInput::from(ds, ds.windows[window_id]), &maps);

    AttnResult out;
    out.casm_csv_path = config.out_dir + "/attn_casm_w" + std::to_string(window_id) + ".csv";
    out.caps_csv_path = config.out_dir + "/attn_caps_w" + std::to_string(window_id) + ".csv";
    {
        std::ofstream f(out.casm_csv_path);
        f.precision(17);
        f << "block,patch,channel";
        for (size_t m = 0; m < ds.m_max; ++m) f << ",slot" << m;
        f << "\n";
        for (size_t b = 0; b < maps.casm.size(); ++b)
            for (size_t p = 0; p < maps.casm[b].size(); ++p) {
                const Tensor& t = maps.casm[b][p];
                for (size_t c = 0; c < t.rows(); ++c) {
                    f << b << ',' << p << ',' << c;
                    for (size_t m = 0; m < t.cols(); ++m) f << ',' << t(c, m);
                    f << "\n";
                }
            }
    }
    {
        std::ofstream f(out.caps_csv_path);
        f.precision(17);
        f << "layer,channel,query_patch";
        const size_t keys = model.n_hist_patches() + model.n_future_patches();
        for (size_t k = 0; k < keys; ++k) f << ",key" << k;
        f << "\n";
        for (size_t l = 0; l < maps.caps.size(); ++l)
            for (size_t c = 0; c < maps.caps[l].size(); ++c) {
                const Tensor& t = maps.caps[l][c];
                for (size_t p = 0; p < t.rows(); ++p) {
                    f << l << ',' << c << ',' << p;
                    for (size_t k = 0; k < t.cols(); ++k) f << ',' << t(p, k);
                    f << "\n";
                }
            }
    }
    return out;
}

std::vector<std::tuple<size_t, int64_t, int64_t>> find_controllability_windows(
    const FmTrajectory& toy, const WindowDataset& test_ds, size_t max_count) {
    std::vector<std::tuple<size_t, int64_t, int64_t>> picks;
    const size_t H = test_ds.horizon;
    const std::string quiet = fm_caption_quiet();
    for (size_t wi = 0; wi < test_ds.windows.size() && picks.size() < max_count; ++wi) {
        const AlignedWindow& w = test_ds.windows[wi];
        const int64_t t = static_cast<int64_t>(w.forecast_start);

        std::vector<FmChange> in_window;
        for (const FmChange& c : toy.changes) {
            if (static_cast<int64_t>(c.step) > t && c.step < w.forecast_start + H) {
                in_window.push_back(c);
            }
        }
        if (in_window.size() != 1) continue;
        const int64_t c0 = static_cast<int64_t>(in_window[0].step);

        // The single change must be announced at exactly one future patch.
        int64_t announce = -1;
        size_t y = 0;
        bool clean = true;
        for (int64_t s : w.future_patch_starts) {
            auto ann = parse_fm_caption(toy.events[static_cast<size_t>(s)].text);
            if (ann && static_cast<int64_t>(s + ann->steps_ahead) == c0) {
                if (announce >= 0) clean = false;
                announce = s;
                y = ann->steps_ahead;
            } else if (ann) {
                clean = false;  // an announcement for some other change
            }
            // No confirmation captions at patch starts: they would leak the
            // new frequency after the swap.
            if (static_cast<int64_t>(s) >= c0 && s < c0 + static_cast<int64_t>(5)) {
                if (!ann && toy.events[static_cast<size_t>(s)].text != quiet) clean = false;
            }
        }
        if (!clean || announce < 0) continue;

        // A later quiet patch to swap with, leaving room to observe the moved
        // change inside the horizon.
        int64_t quiet_start = -1;
        for (int64_t s : w.future_patch_starts) {
            if (s <= announce) continue;
            if (toy.events[static_cast<size_t>(s)].text != quiet) continue;
            int64_t c1 = s + static_cast<int64_t>(y);
            if (c1 >= static_cast<int64_t>(w.forecast_start + H) - 5) continue;
            quiet_start = s;
            break;
        }
        if (quiet_start < 0) continue;
        picks.emplace_back(wi, announce, quiet_start);
    }
    return picks;
}

SwapOracle swap_oracle(const FmTrajectory& toy, const WindowDataset& ds, size_t window_id,
                       int64_t t_announce, int64_t t_quiet) {
    const AlignedWindow& w = ds.windows[window_id];
    const size_t t = w.forecast_start, H = ds.horizon;
    auto ann = parse_fm_caption(toy.events[static_cast<size_t>(t_announce)].text);
    if (!ann) throw ValidationError("swap_oracle: no announcement at t_announce");
    if (parse_fm_caption(toy.events[static_cast<size_t>(t_quiet)].text)) {
        throw ValidationError("swap_oracle: t_quiet also carries an announcement");
    }
    const size_t c0 = static_cast<size_t>(t_announce) + ann->steps_ahead;
    const size_t c1 = static_cast<size_t>(t_quiet) + ann->steps_ahead;
    if (c0 <= t || c0 >= t + H || c1 >= t + H) {
        throw ValidationError("swap_oracle: change points outside the horizon");
    }

    SwapOracle out;
    out.original.assign(toy.values.begin() + t, toy.values.begin() + t + H);
    out.swapped = render_fm_future(toy, t, H, toy.frequencies[t],
                                   {{c1, ann->frequency}});
    out.affected_begin = std::min(c0, c1) - t;
    return out;
}

}  // namespace iatsf::harness
