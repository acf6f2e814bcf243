#include "lambdaq/error.hpp"

namespace lambdaq {

std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::Syntax: return "SyntaxError";
    case Errc::UnknownBase: return "UnknownBase";
    case Errc::UnknownName: return "UnknownName";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::UnknownEntityType: return "UnknownEntityType";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::NoShapeMatch: return "NoShapeMatch";
    case Errc::SourceShapeMismatch: return "SourceShapeMismatch";
    case Errc::InvalidMediation: return "InvalidMediation";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::HeaderMismatch: return "HeaderMismatch";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::WrongShape: return "WrongShape";
    case Errc::ComponentOutOfRange: return "ComponentOutOfRange";
    case Errc::NonBoolQuantifierBody: return "NonBoolQuantifierBody";
    case Errc::AmbiguousVariable: return "AmbiguousVariable";
    case Errc::ElisionAmbiguity: return "ElisionAmbiguity";
    case Errc::IllFormed: return "IllFormed";
    case Errc::NotClosed: return "NotClosed";
    case Errc::NotLambda: return "NotLambda";
    case Errc::BodyNotBool: return "BodyNotBool";
    case Errc::UnsafeQuery: return "UnsafeQuery";
    case Errc::DomainTooLarge: return "DomainTooLarge";
    case Errc::NotPartitionable: return "NotPartitionable";
    case Errc::UnsupportedConstruct: return "UnsupportedConstruct";
    case Errc::NoSchema: return "NoSchema";
    case Errc::Io: return "IoError";
    }
    return "Error";
}

namespace {
std::string format_message(Errc code, const std::string& message, const std::optional<SourceSpan>& span,
                           int line) {
    std::string out(to_string(code));
    if (line > 0)
        out += " at line " + std::to_string(line);
    if (span)
        out += " at " + std::to_string(span->start) + ".." + std::to_string(span->end);
    out += ": " + message;
    return out;
}
} // namespace

Error::Error(Errc code, const std::string& message, std::optional<SourceSpan> span, int line)
    : std::runtime_error(format_message(code, message, span, line)), code_(code), span_(span),
      line_(line), message_(message) {}

} // namespace lambdaq
