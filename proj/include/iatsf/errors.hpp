#pragma once

#include <stdexcept>
#include <string>

namespace iatsf {

/// Machine-readable error categories, mirrored in CLI exit codes.
enum class ErrorCategory {
    kDimension,
    kValidation,
    kConditioning,
    kFormat,
    kTraining,
    kIo,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

    const char* category_name() const {
        switch (category_) {
            case ErrorCategory::kDimension: return "dimension";
            case ErrorCategory::kValidation: return "validation";
            case ErrorCategory::kConditioning: return "conditioning";
            case ErrorCategory::kFormat: return "format";
            case ErrorCategory::kTraining: return "training";
            case ErrorCategory::kIo: return "io";
        }
        return "unknown";
    }

private:
    ErrorCategory category_;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& m) : Error(ErrorCategory::kDimension, m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ErrorCategory::kValidation, m) {}
};
struct ConditioningError : Error {
    explicit ConditioningError(const std::string& m) : Error(ErrorCategory::kConditioning, m) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error(ErrorCategory::kFormat, m) {}
};
struct TrainingError : Error {
    explicit TrainingError(const std::string& m) : Error(ErrorCategory::kTraining, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorCategory::kIo, m) {}
};

}  // namespace iatsf
