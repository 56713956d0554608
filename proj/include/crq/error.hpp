#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crq {

using Complex = std::complex<double>;
using Index = std::uint64_t;
using Dims = std::vector<Index>;

enum class ErrorKind {
    DimensionMismatch,
    NonHermitian,
    NotUnitary,
    NotNormalized,
    NotOrthonormal,
    MalformedContext,
    UncoveredContext,
    EmptyEvent,
    IndexOutOfRange,
    FactorMismatch,
    BadProjectors,
    CoefficientMismatch,
    ApproxInfeasible,
    DimensionBudgetExceeded,
    AxiomViolation,
    InvalidArgument,
    Unsupported,
    Parse,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace crq
