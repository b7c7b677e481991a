#pragma once

#include <stdexcept>
#include <string>

namespace wba {

class UncertifiableComparison : public std::runtime_error {
public:
    explicit UncertifiableComparison(const std::string& what, std::string context = {})
        : std::runtime_error(what), context_(std::move(context)) {}
    const std::string& context() const { return context_; }

private:
    std::string context_;
};

class PrecisionExhausted : public std::runtime_error {
public:
    PrecisionExhausted(const std::string& what, long needed_bits, long max_bits)
        : std::runtime_error(what), needed_(needed_bits), max_(max_bits) {}
    long needed_bits() const { return needed_; }
    long max_bits() const { return max_; }

private:
    long needed_;
    long max_;
};

struct BoundaryAmbiguous : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnumerationBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AmbiguityBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientHorizon : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wba
