#include <CLI11.hpp>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "iatsf/harness/commands.hpp"

using namespace iatsf;
using namespace iatsf::harness;

namespace {

int error_exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::kDimension: return 2;
        case ErrorCategory::kValidation: return 3;
        case ErrorCategory::kConditioning: return 4;
        case ErrorCategory::kFormat: return 5;
        case ErrorCategory::kTraining: return 6;
        case ErrorCategory::kIo: return 7;
    }
    return 1;
}

std::vector<fiats::EventEdit> parse_edits(const std::vector<std::string>& swaps,
                                          const std::vector<std::string>& sets) {
    std::vector<fiats::EventEdit> edits;
    for (const std::string& s : swaps) {
        size_t comma = s.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("--swap expects t1,t2, got '" + s + "'");
        }
        fiats::EventEdit e;
        e.kind = fiats::EventEdit::Kind::kSwap;
        e.t1 = std::stoll(s.substr(0, comma));
        e.t2 = std::stoll(s.substr(comma + 1));
        edits.push_back(e);
    }
    for (const std::string& s : sets) {
        size_t comma = s.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("--set expects t,text, got '" + s + "'");
        }
        fiats::EventEdit e;
        e.kind = fiats::EventEdit::Kind::kSet;
        e.t1 = std::stoll(s.substr(0, comma));
        e.text = s.substr(comma + 1);
        edits.push_back(e);
    }
    return edits;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iatsf: intervention-aware forecasting laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir_override;
    int64_t seed_override = -1;
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--seed", seed_override, "override [run] seed");
    app.add_option("--out", out_dir_override, "override [run] out_dir");

    auto* c_generate = app.add_subcommand("generate", "write series/events/descriptors + manifest");
    auto* c_train = app.add_subcommand("train", "train one checkpoint per configured horizon");
    std::string resume_from;
    c_train->add_option("--resume", resume_from, "resumable checkpoint (.ck with trainer state)");
    auto* c_eval = app.add_subcommand("eval", "evaluate checkpoints on a split");
    std::vector<std::string> checkpoints;
    std::string split_name = "test";
    c_eval->add_option("--checkpoint", checkpoints, "checkpoint path (repeatable)")->required();
    c_eval->add_option("--split", split_name, "train|val|test (default test)");
    auto* c_bounds = app.add_subcommand("bounds", "closed-form floor studies");
    std::string preset = "all";
    c_bounds->add_option("--preset", preset, "b22|b44|b3|b5|all or a spec file path");
    auto* c_ablate = app.add_subcommand("ablate", "text-mode grid + noise sweep");
    auto* c_whatif = app.add_subcommand("whatif", "counterfactual prediction with event edits");
    std::string wi_checkpoint;
    size_t window_id = 0;
    std::vector<std::string> swap_args, set_args;
    c_whatif->add_option("--checkpoint", wi_checkpoint)->required();
    c_whatif->add_option("--window-id", window_id)->required();
    c_whatif->add_option("--swap", swap_args, "swap events at t1,t2 (repeatable)");
    c_whatif->add_option("--set", set_args, "replace event text: t,new text (repeatable)");
    auto* c_attn = app.add_subcommand("attn", "export attention maps for one window");
    std::string at_checkpoint;
    size_t at_window = 0;
    c_attn->add_option("--checkpoint", at_checkpoint)->required();
    c_attn->add_option("--window-id", at_window)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig config = ExperimentConfig::from_file(config_path);
        if (seed_override >= 0) {
            config.seed = static_cast<uint64_t>(seed_override);
            config.toy.seed = config.seed;
            config.model.seed = config.seed;
        }
        if (!out_dir_override.empty()) config.out_dir = out_dir_override;

        if (c_generate->parsed()) {
            GenerateResult r = cmd_generate(config);
            std::printf("wrote %s\n", r.manifest_path.c_str());
        } else if (c_train->parsed()) {
            for (const TrainOutcome& o : cmd_train(config, resume_from)) {
                std::printf("h=%zu best_val=%.6f epochs=%zu -> %s\n", o.horizon, o.result.best_val,
                            o.result.epochs_run, o.checkpoint_path.c_str());
            }
        } else if (c_eval->parsed()) {
            SplitPart part = split_name == "train" ? SplitPart::kTrain
                             : split_name == "val" ? SplitPart::kVal
                                                   : SplitPart::kTest;
            for (const MetricsReport& r : cmd_eval(config, checkpoints, part)) {
                std::printf("h=%zu mse=%.6f mae=%.6f denorm_mae=%.6f (%zu windows)\n", r.horizon,
                            r.mse_avg, r.mae_avg, r.denorm_mae_avg, r.n_windows);
            }
        } else if (c_bounds->parsed()) {
            bool all_pass = true;
            for (const FloorReport& r : cmd_bounds(config, preset)) all_pass = all_pass && r.pass;
            if (!all_pass) return 8;
        } else if (c_ablate->parsed()) {
            AblateResult r = cmd_ablate(config);
            for (const auto& [tr, te, mse] : r.text_grid) {
                std::printf("train=%s test=%s mse=%.6f\n", tr.c_str(), te.c_str(), mse);
            }
            for (const auto& [sigma, mse] : r.noise_sweep) {
                std::printf("sigma=%.2f mse=%.6f\n", sigma, mse);
            }
            std::printf("baseline_zero_news mse=%.6f\n", r.baseline_mse);
        } else if (c_whatif->parsed()) {
            WhatIfResult r =
                cmd_whatif(config, wi_checkpoint, window_id, parse_edits(swap_args, set_args));
            std::printf("wrote %s\n", r.prediction_csv_path.c_str());
            if (r.has_oracle) {
                std::printf("mse_vs_swapped=%.6f mse_vs_original=%.6f (affected from step %zu)\n",
                            r.mse_vs_swapped_oracle, r.mse_vs_original_oracle, r.affected_begin);
            }
        } else if (c_attn->parsed()) {
            AttnResult r = cmd_attn(config, at_checkpoint, at_window);
            std::printf("wrote %s and %s\n", r.casm_csv_path.c_str(), r.caps_csv_path.c_str());
        }
        return 0;
    } catch (const Error& e) {
        nlohmann::json j;
        j["error"] = e.category_name();
        j["message"] = e.what();
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return error_exit_code(e.category());
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"] = "internal";
        j["message"] = e.what();
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 1;
    }
}
