#ifndef EPIALLOC_ERROR_HPP
#define EPIALLOC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace epialloc {

enum class Errc {
    NonPositiveDistance,
    WeightOutOfRange,
    ParseError,
    AsymmetryError,
    LabelMismatch,
    NonPositivePopulation,
    ProbabilityOverflow,
    NegativeCompartment,
    RateTooLarge,
    MissingRow,
    ZeroBeta,
    RateSumOverflow,
    TooFewDays,
    EmptySearchSpace,
    AllCellsDropped,
    NegativeMatrixEntry,
    DimensionMismatch,
    BudgetExceeded,
    IoError,
};

const char* errc_name(Errc c);

/// Library error carrying a typed code plus a human-readable message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace epialloc

#endif
