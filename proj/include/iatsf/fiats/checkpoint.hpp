#pragma once

#include <string>

#include "iatsf/fiats/train.hpp"

namespace iatsf::fiats {

/// Versioned binary checkpoint: header (magic, version, config hash + echo),
/// named parameter blocks with shapes and row-major 64-bit floats, and an
/// optional trainer-state block for exact resumption. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const FiatsModel& model,
                     const TrainerState* state = nullptr);

/// Rebuilds the model from the embedded config echo and restores parameters;
/// fills `state` when the file carries a trainer block (throws if requested
/// but absent).
FiatsModel load_checkpoint(const std::string& path, TrainerState* state = nullptr);

/// Config hash stored in the checkpoint header without loading parameters.
uint64_t peek_checkpoint_config_hash(const std::string& path);

/// Parses the canonical key=value config echo.
FiatsConfig parse_canonical_config(const std::string& text);

}  // namespace iatsf::fiats
