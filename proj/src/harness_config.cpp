#include "iatsf/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "iatsf/io.hpp"

namespace iatsf::harness {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    return parse_string(read_text_file(path));
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cf;
    std::istringstream in(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw FormatError("config line " + std::to_string(lineno) + ": bad section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            cf.sections_[section];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        cf.sections_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cf;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

size_t ConfigFile::integer(const std::string& section, const std::string& key,
                           size_t fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return static_cast<size_t>(std::stoull(str(section, key, "")));
    } catch (const std::exception&) {
        throw FormatError("config: [" + section + "] " + key + " must be an integer");
    }
}

double ConfigFile::real(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return std::stod(str(section, key, ""));
    } catch (const std::exception&) {
        throw FormatError("config: [" + section + "] " + key + " must be a number");
    }
}

bool ConfigFile::boolean(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = str(section, key, "");
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw FormatError("config: [" + section + "] " + key + " must be a boolean");
}

std::vector<double> ConfigFile::real_list(const std::string& section, const std::string& key,
                                          std::vector<double> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(str(section, key, ""))) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw FormatError("config: [" + section + "] " + key + " must be a number list");
        }
    }
    return out;
}

std::vector<size_t> ConfigFile::integer_list(const std::string& section, const std::string& key,
                                             std::vector<size_t> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<size_t> out;
    for (const std::string& item : split_list(str(section, key, ""))) {
        try {
            out.push_back(static_cast<size_t>(std::stoull(item)));
        } catch (const std::exception&) {
            throw FormatError("config: [" + section + "] " + key + " must be an integer list");
        }
    }
    return out;
}

std::string ConfigFile::canonical() const {
    std::ostringstream os;
    for (const auto& [section, kv] : sections_) {
        os << "[" << section << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    }
    return os.str();
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_config(ConfigFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& f) {
    ExperimentConfig c;
    c.canonical_text = f.canonical();

    c.dataset_kind = f.str("dataset", "kind", c.dataset_kind);
    c.toy.n_steps = f.integer("dataset", "n_steps", c.toy.n_steps);
    {
        std::vector<double> freqs = f.real_list("dataset", "frequencies", c.toy.frequency_set);
        c.toy.frequency_set = freqs;
    }
    c.toy.segment_min = f.integer("dataset", "segment_min", c.toy.segment_min);
    c.toy.segment_max = f.integer("dataset", "segment_max", c.toy.segment_max);
    c.toy.amplitude = f.real("dataset", "amplitude", c.toy.amplitude);
    c.toy.pre_captions = f.integer("dataset", "pre_captions", c.toy.pre_captions);
    c.toy.post_captions = f.integer("dataset", "post_captions", c.toy.post_captions);
    c.series_csv = f.str("dataset", "series_csv", "");
    c.events_tsv = f.str("dataset", "events_tsv", "");
    c.descriptors_tsv = f.str("dataset", "descriptors_tsv", "");
    c.embedding_store = f.str("dataset", "embedding_store", "");

    c.lookback = f.integer("windows", "lookback", c.lookback);
    c.horizons = f.integer_list("windows", "horizons", c.horizons);
    c.eval_stride = f.integer("windows", "stride", c.eval_stride);
    c.train_stride = f.integer("windows", "train_stride", c.eval_stride);
    c.split.train = f.real("windows", "split_train", c.split.train);
    c.split.val = f.real("windows", "split_val", c.split.val);
    c.split.test = f.real("windows", "split_test", c.split.test);
    c.m_max = f.integer("windows", "m_max", c.m_max);

    fiats::FiatsConfig& m = c.model;
    m.patch_len = f.integer("model", "patch_len", m.patch_len);
    m.patch_stride = f.integer("model", "patch_stride", m.patch_stride);
    m.d_model = f.integer("model", "d_model", m.d_model);
    m.n_heads = f.integer("model", "n_heads", m.n_heads);
    m.encoder_layers = f.integer("model", "encoder_layers", m.encoder_layers);
    m.casm_blocks = f.integer("model", "casm_blocks", m.casm_blocks);
    m.casm_self_attn_layers =
        f.integer("model", "casm_self_attn_layers", m.casm_self_attn_layers);
    m.caps_layers = f.integer("model", "caps_layers", m.caps_layers);
    m.ff_mult = f.integer("model", "ff_mult", m.ff_mult);
    m.dropout = f.real("model", "dropout", m.dropout);
    m.instance_norm = f.boolean("model", "instance_norm", m.instance_norm);
    m.use_history_news = f.boolean("model", "use_history_news", m.use_history_news);
    m.embed_dim = f.integer("model", "embed_dim", m.embed_dim);
    m.out_patch_len = f.integer("model", "out_patch_len", m.out_patch_len);

    m.lr = f.real("train", "lr", m.lr);
    m.epochs = f.integer("train", "epochs", m.epochs);
    m.batch_size = f.integer("train", "batch_size", m.batch_size);
    m.patience = f.integer("train", "patience", m.patience);

    c.zero_news = f.boolean("ablation", "zero_news", c.zero_news);
    c.zero_desc = f.boolean("ablation", "zero_desc", c.zero_desc);
    c.text_mode_train = parse_text_mode(f.str("ablation", "text_mode_train", "good"));
    c.text_mode_test = parse_text_mode(f.str("ablation", "text_mode_test", "good"));
    c.noise_sigma = f.real("ablation", "noise_sigma", c.noise_sigma);
    c.noise_grid = f.real_list("ablation", "noise_grid", c.noise_grid);

    c.out_dir = f.str("run", "out_dir", c.out_dir);
    c.seed = f.integer("run", "seed", c.seed);
    c.toy.seed = f.integer("dataset", "seed", c.seed);
    c.model.seed = c.seed;
    return c;
}

fiats::FiatsConfig ExperimentConfig::model_for(size_t horizon, size_t channels) const {
    fiats::FiatsConfig m = model;
    m.lookback = lookback;
    m.horizon = horizon;
    m.channels = channels;
    m.m_max = m_max;
    m.validate();
    return m;
}

uint64_t ExperimentConfig::experiment_hash() const {
    std::string text = canonical_text + "|seed=" + std::to_string(seed);
    return fnv1a64(text.data(), text.size());
}

}  // namespace iatsf::harness
