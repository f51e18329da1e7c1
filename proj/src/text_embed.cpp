#include "iatsf/text_embed.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iatsf {

namespace {
constexpr uint64_t kBucketSeed = 0x6a09e667f3bcc909ULL;
constexpr uint64_t kSignSeed = 0xbb67ae8584caa73bULL;
}  // namespace

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void l2_normalize(std::vector<double>& v) {
    double n = l2_norm(v);
    if (n > 0.0) {
        for (double& x : v) x /= n;
    }
}

std::vector<double> embed_text_hash(const std::string& text, size_t dim) {
    if (dim < 16) throw ValidationError("embed_text_hash: dim must be >= 16");
    std::vector<double> acc(dim, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        uint64_t bucket = fnv1a64(token.data(), token.size(), kBucketSeed) % dim;
        uint64_t sign = fnv1a64(token.data(), token.size(), kSignSeed) & 1u;
        acc[bucket] += sign ? 1.0 : -1.0;
        token.clear();
    };
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            token.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    l2_normalize(acc);  // all-zero stays the null embedding
    return acc;
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("EmbeddingStore: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw FormatError("EmbeddingStore: empty file " + path);
    std::istringstream hs(header);
    std::string tag;
    size_t dim = 0;
    if (!(hs >> tag >> dim) || tag != "dim" || dim == 0) {
        throw FormatError("EmbeddingStore: header must be 'dim <D>', got '" + header + "'");
    }
    EmbeddingStore store(dim);
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab1 = line.find('\t');
        size_t tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            throw FormatError("EmbeddingStore: malformed line " + std::to_string(lineno));
        }
        std::string text = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::vector<double> vec;
        vec.reserve(dim);
        std::istringstream vs(line.substr(tab2 + 1));
        std::string num;
        while (std::getline(vs, num, ',')) {
            try {
                vec.push_back(std::stod(num));
            } catch (const std::exception&) {
                throw FormatError("EmbeddingStore: bad float on line " + std::to_string(lineno));
            }
        }
        if (vec.size() != dim) {
            throw FormatError("EmbeddingStore: line " + std::to_string(lineno) + " has " +
                              std::to_string(vec.size()) + " floats, header declares " +
                              std::to_string(dim));
        }
        l2_normalize(vec);
        store.put(text, std::move(vec));
    }
    return store;
}

void EmbeddingStore::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("EmbeddingStore: cannot write " + path);
    out << "dim " << dim_ << "\n";
    char buf[32];
    for (const auto& [hash, entry] : entries_) {
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
        out << buf << '\t' << entry.text << '\t';
        for (size_t i = 0; i < entry.vec.size(); ++i) {
            char num[40];
            std::snprintf(num, sizeof(num), "%.17g", entry.vec[i]);
            out << (i ? "," : "") << num;
        }
        out << "\n";
    }
}

void EmbeddingStore::put(const std::string& text, std::vector<double> vec) {
    if (vec.size() != dim_) {
        throw FormatError("EmbeddingStore::put: vector dim " + std::to_string(vec.size()) +
                          " != store dim " + std::to_string(dim_));
    }
    uint64_t h = fnv1a64(text.data(), text.size());
    entries_[h] = Entry{text, std::move(vec)};
}

const std::vector<double>* EmbeddingStore::find(const std::string& text) const {
    auto it = entries_.find(fnv1a64(text.data(), text.size()));
    return it == entries_.end() ? nullptr : &it->second.vec;
}

}  // namespace iatsf
