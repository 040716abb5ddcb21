#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace carnot {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CARNOT_DEFINE_ERROR(Name)                  \
    class Name : public Error {                    \
    public:                                        \
        using Error::Error;                        \
    }

CARNOT_DEFINE_ERROR(UnsupportedStep);
CARNOT_DEFINE_ERROR(NonPositiveLambda);
CARNOT_DEFINE_ERROR(DimensionMismatch);
CARNOT_DEFINE_ERROR(DomainExit);
CARNOT_DEFINE_ERROR(UnknownName);
CARNOT_DEFINE_ERROR(InvalidParameter);
CARNOT_DEFINE_ERROR(SingularGradient);
CARNOT_DEFINE_ERROR(NotSemiConvex);
CARNOT_DEFINE_ERROR(EmptyDomain);
CARNOT_DEFINE_ERROR(Diverged);
CARNOT_DEFINE_ERROR(EvaluationError);
CARNOT_DEFINE_ERROR(ConfigError);

#undef CARNOT_DEFINE_ERROR

/// Parse failure carrying the byte offset of the offending token.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnknownSymbol : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

}  // namespace carnot
