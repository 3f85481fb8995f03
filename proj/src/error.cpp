#include "epialloc/error.hpp"

namespace epialloc {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NonPositiveDistance: return "NonPositiveDistance";
        case Errc::WeightOutOfRange: return "WeightOutOfRange";
        case Errc::ParseError: return "ParseError";
        case Errc::AsymmetryError: return "AsymmetryError";
        case Errc::LabelMismatch: return "LabelMismatch";
        case Errc::NonPositivePopulation: return "NonPositivePopulation";
        case Errc::ProbabilityOverflow: return "ProbabilityOverflow";
        case Errc::NegativeCompartment: return "NegativeCompartment";
        case Errc::RateTooLarge: return "RateTooLarge";
        case Errc::MissingRow: return "MissingRow";
        case Errc::ZeroBeta: return "ZeroBeta";
        case Errc::RateSumOverflow: return "RateSumOverflow";
        case Errc::TooFewDays: return "TooFewDays";
        case Errc::EmptySearchSpace: return "EmptySearchSpace";
        case Errc::AllCellsDropped: return "AllCellsDropped";
        case Errc::NegativeMatrixEntry: return "NegativeMatrixEntry";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::BudgetExceeded: return "BudgetExceeded";
        case Errc::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace epialloc
