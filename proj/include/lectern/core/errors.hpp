#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lectern {

// Root of every failure raised by the pipeline. `kind()` is a stable
// machine-readable tag used by the CLI and the review API.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message, std::string detail = {})
        : std::runtime_error(message), kind_(std::move(kind)), detail_(std::move(detail)) {}

    const std::string& kind() const noexcept { return kind_; }
    // Supplementary payload, e.g. the raw service response that failed schema.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string kind_;
    std::string detail_;
};

#define LECTERN_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& message,                    \
                      std::string detail = {})                       \
            : Error(#Name, message, std::move(detail)) {}            \
    }

// Malformed canonical text. Message carries "line L, column C".
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line = 0, int column = 0)
        : Error("ParseError", message), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

// A structurally valid document that violates a type's schema or invariants.
LECTERN_DEFINE_ERROR(SchemaError);
LECTERN_DEFINE_ERROR(ValidationError);

LECTERN_DEFINE_ERROR(SkeletonError);
LECTERN_DEFINE_ERROR(ExpandError);
LECTERN_DEFINE_ERROR(RefineError);
LECTERN_DEFINE_ERROR(SegmentError);
LECTERN_DEFINE_ERROR(PaginateError);
LECTERN_DEFINE_ERROR(AggregateError);
LECTERN_DEFINE_ERROR(CodegenError);
LECTERN_DEFINE_ERROR(DialectError);
LECTERN_DEFINE_ERROR(NarrateError);
LECTERN_DEFINE_ERROR(TtsError);
LECTERN_DEFINE_ERROR(SyncError);
LECTERN_DEFINE_ERROR(RendererUnavailable);
LECTERN_DEFINE_ERROR(ApplyError);
LECTERN_DEFINE_ERROR(EditError);
LECTERN_DEFINE_ERROR(ServiceError);
LECTERN_DEFINE_ERROR(TransportError);
LECTERN_DEFINE_ERROR(ResumeError);
LECTERN_DEFINE_ERROR(MergeError);
LECTERN_DEFINE_ERROR(ConfigError);
LECTERN_DEFINE_ERROR(LockError);
LECTERN_DEFINE_ERROR(ReviewError);

class FixtureMiss : public Error {
public:
    FixtureMiss(std::string hash, const std::string& purpose)
        : Error("FixtureMiss", "no recorded fixture for " + purpose + "/" + hash),
          hash_(std::move(hash)) {}

    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

#undef LECTERN_DEFINE_ERROR

}  // namespace lectern
