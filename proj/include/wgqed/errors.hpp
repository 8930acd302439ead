#ifndef WGQED_ERRORS_HPP
#define WGQED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wgqed {

// Coarse error classes, aligned with the CLI exit codes:
// parse/config -> 2, numerical/convergence -> 3, physics consistency -> 4.
enum class ErrorClass { Parse = 2, Numerical = 3, Physics = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string msg)
        : std::runtime_error(std::move(msg)), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

#define WGQED_DEFINE_ERROR(Name, Class)                  \
    class Name : public Error {                          \
    public:                                              \
        explicit Name(std::string msg)                   \
            : Error(ErrorClass::Class, std::move(msg)) {} \
    }

WGQED_DEFINE_ERROR(ParseError, Parse);
WGQED_DEFINE_ERROR(ConfigError, Parse);

WGQED_DEFINE_ERROR(NumericalError, Numerical);
WGQED_DEFINE_ERROR(NondegeneracyError, Numerical);
WGQED_DEFINE_ERROR(CalibrationError, Numerical);
WGQED_DEFINE_ERROR(TruncationError, Numerical);
WGQED_DEFINE_ERROR(DarkChannelError, Numerical);
WGQED_DEFINE_ERROR(ConvergenceError, Numerical);
WGQED_DEFINE_ERROR(NoPeakError, Numerical);
WGQED_DEFINE_ERROR(NoSignalError, Numerical);
WGQED_DEFINE_ERROR(ModeFitError, Numerical);

WGQED_DEFINE_ERROR(InconsistentParameters, Physics);
WGQED_DEFINE_ERROR(DivergentSaturation, Physics);
WGQED_DEFINE_ERROR(DivergentCooperativity, Physics);
WGQED_DEFINE_ERROR(UnsupportedInFormula, Physics);
WGQED_DEFINE_ERROR(InvalidParameters, Physics);

#undef WGQED_DEFINE_ERROR

} // namespace wgqed

#endif
