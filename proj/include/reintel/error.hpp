#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reintel {

enum class ErrorKind {
    // corpus
    MissingFile,
    MissingColumn,
    DuplicateId,
    EmptyId,
    BadLabel,
    MalformedCsv,
    EmptyCorpus,
    // preprocess
    NoValidValues,
    UnlabeledRecord,
    // encoders
    MagicMismatch,
    UnsupportedVersion,
    DimMismatch,
    Truncated,
    TrailingData,
    MissingEmbedding,
    // fusion / training / metrics
    InvalidConfig,
    SingleClass,
    LengthMismatch,
    NonFiniteValue,
    DegenerateFold,
    BadCheckpoint,
    // cli
    BadConfig,
    Io,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::MissingFile: return "missing-file";
    case ErrorKind::MissingColumn: return "missing-column";
    case ErrorKind::DuplicateId: return "duplicate-id";
    case ErrorKind::EmptyId: return "empty-id";
    case ErrorKind::BadLabel: return "bad-label";
    case ErrorKind::MalformedCsv: return "malformed-csv";
    case ErrorKind::EmptyCorpus: return "empty-corpus";
    case ErrorKind::NoValidValues: return "no-valid-values";
    case ErrorKind::UnlabeledRecord: return "unlabeled-record";
    case ErrorKind::MagicMismatch: return "magic-mismatch";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::DimMismatch: return "dim-mismatch";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::TrailingData: return "trailing-data";
    case ErrorKind::MissingEmbedding: return "missing-embedding";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::SingleClass: return "single-class";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::NonFiniteValue: return "non-finite-value";
    case ErrorKind::DegenerateFold: return "degenerate-fold";
    case ErrorKind::BadCheckpoint: return "bad-checkpoint";
    case ErrorKind::BadConfig: return "bad-config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Structured error raised by every module; `module()` names the failing stage.
class Error : public std::runtime_error {
public:
    Error(std::string module, ErrorKind kind, const std::string& message)
        : std::runtime_error(module + ": " + message + " [" + std::string(to_string(kind)) + "]"),
          module_(std::move(module)),
          kind_(kind) {}

    [[nodiscard]] const std::string& module() const noexcept { return module_; }
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    std::string module_;
    ErrorKind kind_;
};

} // namespace reintel
