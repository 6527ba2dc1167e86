#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cimflow {

enum class ErrorCode {
  SyntaxError,
  UnsupportedConstruct,
  DuplicateDirective,
  UnknownModule,
  RecursiveInstantiation,
  PortMismatch,
  WidthMismatch,
  UndeclaredNet,
  DuplicateName,
  SupplyShort,
  AmbiguousTop,
  InvalidNetlist,
  UnknownNet,
  UnknownDesignator,
  WrongKind,
  NotLeaking,
  InvalidDimension,
  ConfigNetMismatch,
  MissingMask,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::DuplicateDirective: return "DuplicateDirective";
    case ErrorCode::UnknownModule: return "UnknownModule";
    case ErrorCode::RecursiveInstantiation: return "RecursiveInstantiation";
    case ErrorCode::PortMismatch: return "PortMismatch";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::UndeclaredNet: return "UndeclaredNet";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::SupplyShort: return "SupplyShort";
    case ErrorCode::AmbiguousTop: return "AmbiguousTop";
    case ErrorCode::InvalidNetlist: return "InvalidNetlist";
    case ErrorCode::UnknownNet: return "UnknownNet";
    case ErrorCode::UnknownDesignator: return "UnknownDesignator";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::NotLeaking: return "NotLeaking";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::ConfigNetMismatch: return "ConfigNetMismatch";
    case ErrorCode::MissingMask: return "MissingMask";
  }
  return "Unknown";
}

// 1-based position inside an input text.
struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;

  bool operator==(const SourceSpan&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<SourceSpan> span = std::nullopt)
      : std::runtime_error(format(code, message, span)), code_(code), detail_(message), span_(std::move(span)) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }
  const std::optional<SourceSpan>& span() const { return span_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            const std::optional<SourceSpan>& span) {
    std::string out;
    if (span) {
      out += span->file + ":" + std::to_string(span->line) + ":" + std::to_string(span->column) + ": ";
    }
    out += std::string(to_string(code)) + ": " + message;
    return out;
  }

  ErrorCode code_;
  std::string detail_;
  std::optional<SourceSpan> span_;
};

}  // namespace cimflow
