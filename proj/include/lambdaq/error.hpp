#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lambdaq {

/// Byte offsets into a query text, half-open.
struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    bool operator==(const SourceSpan&) const = default;
};

enum class Errc {
    Syntax,
    UnknownBase,
    UnknownName,
    UnknownAttribute,
    UnknownEntityType,
    UnknownVariable,
    DuplicateName,
    NoShapeMatch,
    SourceShapeMismatch,
    InvalidMediation,
    TypeMismatch,
    HeaderMismatch,
    ArityMismatch,
    WrongShape,
    ComponentOutOfRange,
    NonBoolQuantifierBody,
    AmbiguousVariable,
    ElisionAmbiguity,
    IllFormed,
    NotClosed,
    NotLambda,
    BodyNotBool,
    UnsafeQuery,
    DomainTooLarge,
    NotPartitionable,
    UnsupportedConstruct,
    NoSchema,
    Io,
};

std::string_view to_string(Errc code);

/// The single exception type thrown by the library. Carries a machine-readable
/// code plus an optional span (query text) or line number (data files).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::optional<SourceSpan> span = std::nullopt,
          int line = 0);

    Errc code() const noexcept { return code_; }
    const std::optional<SourceSpan>& span() const noexcept { return span_; }
    int line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    Errc code_;
    std::optional<SourceSpan> span_;
    int line_;
    std::string message_;
};

} // namespace lambdaq
