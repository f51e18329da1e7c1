#pragma once

#include <string>
#include <vector>

#include "iatsf/dataio.hpp"
#include "iatsf/events.hpp"

namespace iatsf {

// Series CSV: header "timestamp,ch0[,ch1,...]", one row per step.
void write_series_csv(const std::string& path, const Series& series);
Series read_series_csv(const std::string& path);

// Events TSV: "timestamp<TAB>text", sorted by timestamp.
void write_events_tsv(const std::string& path, const std::vector<InterventionEvent>& events);
std::vector<InterventionEvent> read_events_tsv(const std::string& path);

// Descriptors TSV: "channel_index<TAB>text".
void write_descriptors_tsv(const std::string& path,
                           const std::vector<ChannelDescriptor>& descriptors);
std::vector<ChannelDescriptor> read_descriptors_tsv(const std::string& path);

// Generic numeric CSV writer for reports (header + rows).
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace iatsf
