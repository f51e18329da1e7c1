#include "iatsf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace iatsf {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_series_csv(const std::string& path, const Series& series) {
    std::ofstream out(path);
    if (!out) throw IoError("write_series_csv: cannot write " + path);
    out << "timestamp";
    for (size_t c = 0; c < series.channels; ++c) out << ",ch" << c;
    out << "\n";
    for (size_t t = 0; t < series.rows(); ++t) {
        out << series.timestamps[t];
        for (size_t c = 0; c < series.channels; ++c) out << ',' << fmt_double(series.at(t, c));
        out << "\n";
    }
}

Series read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_series_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("read_series_csv: empty file");
    size_t channels = 0;
    for (char c : line) channels += (c == ',');
    if (channels == 0) throw FormatError("read_series_csv: header must be timestamp,ch0[,...]");
    Series s;
    s.channels = channels;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        if (!std::getline(ls, cell, ',')) {
            throw FormatError("read_series_csv: bad line " + std::to_string(lineno));
        }
        try {
            s.timestamps.push_back(std::stoll(cell));
            for (size_t c = 0; c < channels; ++c) {
                if (!std::getline(ls, cell, ',')) {
                    throw FormatError("read_series_csv: line " + std::to_string(lineno) +
                                      " has too few columns");
                }
                s.data.push_back(std::stod(cell));
            }
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception&) {
            throw FormatError("read_series_csv: bad number on line " + std::to_string(lineno));
        }
    }
    return s;
}

void write_events_tsv(const std::string& path, const std::vector<InterventionEvent>& events) {
    std::ofstream out(path);
    if (!out) throw IoError("write_events_tsv: cannot write " + path);
    for (const InterventionEvent& e : events) out << e.timestamp << '\t' << e.text << "\n";
}

std::vector<InterventionEvent> read_events_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_events_tsv: cannot open " + path);
    std::vector<InterventionEvent> events;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError("read_events_tsv: missing tab on line " + std::to_string(lineno));
        }
        InterventionEvent e;
        try {
            e.timestamp = std::stoll(line.substr(0, tab));
        } catch (const std::exception&) {
            throw FormatError("read_events_tsv: bad timestamp on line " + std::to_string(lineno));
        }
        e.text = line.substr(tab + 1);
        events.push_back(std::move(e));
    }
    return events;
}

void write_descriptors_tsv(const std::string& path,
                           const std::vector<ChannelDescriptor>& descriptors) {
    std::ofstream out(path);
    if (!out) throw IoError("write_descriptors_tsv: cannot write " + path);
    for (const ChannelDescriptor& d : descriptors) out << d.channel_index << '\t' << d.text << "\n";
}

std::vector<ChannelDescriptor> read_descriptors_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_descriptors_tsv: cannot open " + path);
    std::vector<ChannelDescriptor> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError("read_descriptors_tsv: missing tab on line " + std::to_string(lineno));
        }
        ChannelDescriptor d;
        try {
            d.channel_index = static_cast<size_t>(std::stoull(line.substr(0, tab)));
        } catch (const std::exception&) {
            throw FormatError("read_descriptors_tsv: bad index on line " + std::to_string(lineno));
        }
        d.text = line.substr(tab + 1);
        out.push_back(std::move(d));
    }
    return out;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("write_csv: cannot write " + path);
    out << header << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt_double(row[i]);
        out << "\n";
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_text_file: cannot write " + path);
    out << content;
}

}  // namespace iatsf
