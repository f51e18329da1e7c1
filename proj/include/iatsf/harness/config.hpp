#pragma once

#include <map>
#include <string>
#include <vector>

#include "iatsf/dataio.hpp"
#include "iatsf/fiats/config.hpp"
#include "iatsf/fm_toy.hpp"

namespace iatsf::harness {

/// Plain-text config file: "[section]" headers, "key = value" lines, '#'
/// comments. Schema documented in the README.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string str(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    size_t integer(const std::string& section, const std::string& key, size_t fallback) const;
    double real(const std::string& section, const std::string& key, double fallback) const;
    bool boolean(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> real_list(const std::string& section, const std::string& key,
                                  std::vector<double> fallback) const;
    std::vector<size_t> integer_list(const std::string& section, const std::string& key,
                                     std::vector<size_t> fallback) const;

    /// Sorted canonical echo (sections and keys in lexical order).
    std::string canonical() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct ExperimentConfig {
    // [dataset]
    std::string dataset_kind = "fm_toy";  // fm_toy | csv
    FMToyConfig toy;
    std::string series_csv, events_tsv, descriptors_tsv, embedding_store;

    // [windows]
    size_t lookback = 60;
    std::vector<size_t> horizons = {14};
    size_t eval_stride = 1;
    size_t train_stride = 1;
    SplitSpec split;
    size_t m_max = 4;

    // [model] + [train] merged into the model config; horizon/channels are
    // filled per run.
    fiats::FiatsConfig model;

    // [ablation]
    bool zero_news = false;
    bool zero_desc = false;
    TextMode text_mode_train = TextMode::kGood;
    TextMode text_mode_test = TextMode::kGood;
    double noise_sigma = 0.0;
    std::vector<double> noise_grid = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0};

    // [run]
    std::string out_dir = "out";
    uint64_t seed = 7;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_config(const ConfigFile& file);

    /// Model config specialized to one horizon / channel count.
    fiats::FiatsConfig model_for(size_t horizon, size_t channels) const;

    uint64_t experiment_hash() const;
    std::string canonical_text;  // canonical config echo this was parsed from
};

}  // namespace iatsf::harness
