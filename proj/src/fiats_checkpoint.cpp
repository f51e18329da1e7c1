#include "iatsf/fiats/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace iatsf::fiats {

namespace {

constexpr char kMagic[8] = {'I', 'A', 'T', 'S', 'F', 'C', 'K', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("checkpoint: truncated file");
    return v;
}

void put_string(std::ofstream& out, const std::string& s) {
    put<uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& in) {
    uint64_t len = get<uint64_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw FormatError("checkpoint: truncated string");
    return s;
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::ifstream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw FormatError("checkpoint: truncated data block");
}

}  // namespace

FiatsConfig parse_canonical_config(const std::string& text) {
    FiatsConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("config echo: bad line '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto u = [&] { return static_cast<size_t>(std::stoull(val)); };
        if (key == "patch_len") cfg.patch_len = u();
        else if (key == "patch_stride") cfg.patch_stride = u();
        else if (key == "d_model") cfg.d_model = u();
        else if (key == "n_heads") cfg.n_heads = u();
        else if (key == "encoder_layers") cfg.encoder_layers = u();
        else if (key == "casm_blocks") cfg.casm_blocks = u();
        else if (key == "casm_self_attn_layers") cfg.casm_self_attn_layers = u();
        else if (key == "caps_layers") cfg.caps_layers = u();
        else if (key == "ff_mult") cfg.ff_mult = u();
        else if (key == "dropout") cfg.dropout = std::stod(val);
        else if (key == "instance_norm") cfg.instance_norm = val == "1";
        else if (key == "use_history_news") cfg.use_history_news = val == "1";
        else if (key == "embed_dim") cfg.embed_dim = u();
        else if (key == "lookback") cfg.lookback = u();
        else if (key == "horizon") cfg.horizon = u();
        else if (key == "out_patch_len") cfg.out_patch_len = u();
        else if (key == "channels") cfg.channels = u();
        else if (key == "m_max") cfg.m_max = u();
        else throw FormatError("config echo: unknown key '" + key + "'");
    }
    return cfg;
}

void save_checkpoint(const std::string& path, const FiatsModel& model, const TrainerState* state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    put<uint32_t>(out, 1);
    put<uint64_t>(out, model.config().config_hash());
    put_string(out, model.config().canonical_text());

    const std::vector<Tensor>& params = model.params();
    put<uint32_t>(out, static_cast<uint32_t>(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        put_string(out, model.param_names()[i]);
        const Shape& shape = params[i].shape();
        put<uint32_t>(out, static_cast<uint32_t>(shape.size()));
        for (size_t d : shape) put<uint64_t>(out, d);
        put_doubles(out, params[i].vec());
    }

    put<uint8_t>(out, state ? 1 : 0);
    if (state) {
        put<int64_t>(out, state->adam_step);
        for (size_t i = 0; i < params.size(); ++i) {
            put_doubles(out, state->adam_m[i]);
            put_doubles(out, state->adam_v[i]);
        }
        put<uint64_t>(out, state->next_epoch);
        put<double>(out, state->best_val);
        put<uint64_t>(out, state->best_epoch);
        put<uint64_t>(out, state->since_best);
        for (size_t i = 0; i < params.size(); ++i) put_doubles(out, state->best_params[i]);
    }
}

FiatsModel load_checkpoint(const std::string& path, TrainerState* state) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("load_checkpoint: bad magic in " + path);
    }
    uint32_t version = get<uint32_t>(in);
    if (version != 1) throw FormatError("load_checkpoint: unsupported version");
    uint64_t stored_hash = get<uint64_t>(in);
    std::string config_text = get_string(in);
    FiatsConfig cfg = parse_canonical_config(config_text);
    if (cfg.config_hash() != stored_hash) {
        throw FormatError("load_checkpoint: config hash mismatch (corrupt file)");
    }

    FiatsModel model(cfg, 0);
    uint32_t n_params = get<uint32_t>(in);
    if (n_params != model.params().size()) {
        throw FormatError("load_checkpoint: parameter count mismatch");
    }
    for (size_t i = 0; i < n_params; ++i) {
        std::string name = get_string(in);
        if (name != model.param_names()[i]) {
            throw FormatError("load_checkpoint: parameter order mismatch at " + name);
        }
        uint32_t ndims = get<uint32_t>(in);
        Shape shape(ndims);
        for (auto& d : shape) d = get<uint64_t>(in);
        if (shape != model.params()[i].shape()) {
            throw FormatError("load_checkpoint: shape mismatch at " + name);
        }
        get_doubles(in, model.params()[i].vec());
    }

    uint8_t has_state = get<uint8_t>(in);
    if (state) {
        if (!has_state) throw FormatError("load_checkpoint: no trainer state in " + path);
        state->adam_step = get<int64_t>(in);
        state->adam_m.assign(n_params, {});
        state->adam_v.assign(n_params, {});
        for (size_t i = 0; i < n_params; ++i) {
            state->adam_m[i].resize(model.params()[i].size());
            state->adam_v[i].resize(model.params()[i].size());
            get_doubles(in, state->adam_m[i]);
            get_doubles(in, state->adam_v[i]);
        }
        state->next_epoch = get<uint64_t>(in);
        state->best_val = get<double>(in);
        state->best_epoch = get<uint64_t>(in);
        state->since_best = get<uint64_t>(in);
        state->best_params.assign(n_params, {});
        for (size_t i = 0; i < n_params; ++i) {
            state->best_params[i].resize(model.params()[i].size());
            get_doubles(in, state->best_params[i]);
        }
    }
    return model;
}

uint64_t peek_checkpoint_config_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("peek_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("peek_checkpoint: bad magic in " + path);
    }
    get<uint32_t>(in);
    return get<uint64_t>(in);
}

}  // namespace iatsf::fiats
