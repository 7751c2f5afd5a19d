#pragma once

#include <stdexcept>
#include <string>

namespace ssta {

// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorCategory { data, numeric };

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg, ErrorCategory cat = ErrorCategory::data)
        : std::runtime_error(msg), category_(cat) {}
    ErrorCategory category() const noexcept { return category_; }
    virtual const char* kind() const noexcept { return "Error"; }

private:
    ErrorCategory category_;
};

#define SSTA_ERROR_KIND(name) \
    const char* kind() const noexcept override { return #name; }

class ParseError : public Error {
public:
    long line;       // 1-based line number in the input
    long expected;   // expected field count, 0 when not a field-count issue
    long got;
    ParseError(long line_, const std::string& what_, long expected_ = 0, long got_ = 0)
        : Error("parse error at line " + std::to_string(line_) + ": " + what_),
          line(line_), expected(expected_), got(got_) {}
    SSTA_ERROR_KIND(ParseError)
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what_ = "input has no data")
        : Error(what_) {}
    SSTA_ERROR_KIND(EmptyInput)
};

class RangeError : public Error {
public:
    explicit RangeError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(RangeError)
};

class DuplicateLocation : public Error {
public:
    std::string id;
    explicit DuplicateLocation(const std::string& id_)
        : Error("duplicate location id: " + id_), id(id_) {}
    SSTA_ERROR_KIND(DuplicateLocation)
};

class InsufficientCoverage : public Error {
public:
    int month;  // calendar month 0..11 that has no samples
    explicit InsufficientCoverage(int month_)
        : Error("base period has no occurrence of calendar month " + std::to_string(month_)),
          month(month_) {}
    SSTA_ERROR_KIND(InsufficientCoverage)
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(ShapeError)
};

class NoBlocks : public Error {
public:
    explicit NoBlocks(const std::string& what_ = "series shorter than one window")
        : Error(what_) {}
    SSTA_ERROR_KIND(NoBlocks)
};

class LatticeError : public Error {
public:
    explicit LatticeError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(LatticeError)
};

class MissingVariable : public Error {
public:
    std::string name;
    explicit MissingVariable(const std::string& name_)
        : Error("required variable grid absent: " + name_), name(name_) {}
    SSTA_ERROR_KIND(MissingVariable)
};

class LayoutError : public Error {
public:
    explicit LayoutError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(LayoutError)
};

class InsufficientHistory : public Error {
public:
    explicit InsufficientHistory(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(InsufficientHistory)
};

class DegenerateNormalization : public Error {
public:
    explicit DegenerateNormalization(const std::string& what_)
        : Error(what_) {}
    SSTA_ERROR_KIND(DegenerateNormalization)
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what_)
        : Error(what_, ErrorCategory::numeric) {}
    SSTA_ERROR_KIND(NumericError)
};

class EmptyTraining : public Error {
public:
    explicit EmptyTraining(const std::string& what_ = "no training rows")
        : Error(what_) {}
    SSTA_ERROR_KIND(EmptyTraining)
};

class DivergenceError : public Error {
public:
    int epoch;
    explicit DivergenceError(int epoch_)
        : Error("training loss became non-finite at epoch " + std::to_string(epoch_),
                ErrorCategory::numeric),
          epoch(epoch_) {}
    SSTA_ERROR_KIND(DivergenceError)
};

class EmptyComparison : public Error {
public:
    explicit EmptyComparison(const std::string& what_ = "no present value pairs to compare")
        : Error(what_) {}
    SSTA_ERROR_KIND(EmptyComparison)
};

class IncompleteBaseline : public Error {
public:
    explicit IncompleteBaseline(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(IncompleteBaseline)
};

class SplitError : public Error {
public:
    explicit SplitError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(SplitError)
};

class UnknownLocation : public Error {
public:
    explicit UnknownLocation(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(UnknownLocation)
};

class UnsupportedOffset : public Error {
public:
    explicit UnsupportedOffset(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(UnsupportedOffset)
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(ConfigError)
};

// Catch-all for contract violations that have no dedicated type above.
class DataError : public Error {
public:
    explicit DataError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(DataError)
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what_) : Error(what_) {}
    SSTA_ERROR_KIND(IoError)
};

#undef SSTA_ERROR_KIND

}  // namespace ssta
