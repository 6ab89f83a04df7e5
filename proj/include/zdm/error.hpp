#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zdm {

enum class ErrorKind {
    InvalidArgument,
    ParseError,
    EmptyLanguage,
    ShapeTooLarge,
    ShapeMismatch,
    NotFound,
    NotGenericEnough,
    GapOutOfRange,
    NoMarkers,
    UncoveredPrefix,
    CoverFailure,
    QuadratureBudgetExceeded,
    NoSmallPiece,
    OutsideSimplex,
    NotDense,
    GroupTooCoarse,
    PlacementConflict,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::EmptyLanguage: return "EmptyLanguage";
        case ErrorKind::ShapeTooLarge: return "ShapeTooLarge";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::NotGenericEnough: return "NotGenericEnough";
        case ErrorKind::GapOutOfRange: return "GapOutOfRange";
        case ErrorKind::NoMarkers: return "NoMarkers";
        case ErrorKind::UncoveredPrefix: return "UncoveredPrefix";
        case ErrorKind::CoverFailure: return "CoverFailure";
        case ErrorKind::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
        case ErrorKind::NoSmallPiece: return "NoSmallPiece";
        case ErrorKind::OutsideSimplex: return "OutsideSimplex";
        case ErrorKind::NotDense: return "NotDense";
        case ErrorKind::GroupTooCoarse: return "GroupTooCoarse";
        case ErrorKind::PlacementConflict: return "PlacementConflict";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI,
/// the Python module) can map it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace zdm
