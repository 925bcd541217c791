#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace btprint {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Capture parsing.
struct BadMagic : Error {
    using Error::Error;
};
struct UnsupportedVersion : Error {
    using Error::Error;
};
struct UnsupportedDatalink : Error {
    using Error::Error;
};
struct TruncatedRecord : Error {
    TruncatedRecord(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), byte_offset(offset) {}
    std::size_t byte_offset;
};

// Canonical JSONL.
struct SchemaError : Error {
    SchemaError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_no(line) {}
    std::size_t line_no;
};

// Feature extraction.
struct InsufficientData : Error {
    using Error::Error;
};

// Learners.
struct DegenerateDataset : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct FilterMismatch : Error {
    using Error::Error;
};

// Selection.
struct TooFewSessions : Error {
    using Error::Error;
};
struct NoValidCells : Error {
    using Error::Error;
};
struct EmptyDataset : Error {
    using Error::Error;
};

// Synthesis.
struct InvalidProfile : Error {
    using Error::Error;
};

}  // namespace btprint
