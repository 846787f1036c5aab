#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace isect5 {

/// Coarse error classes; the CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorClass { Input, Degeneracy, Numerical };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorClass cls, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)), class_(cls) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return class_; }

    /// Pipeline stage that raised the error, empty when raised outside analyze().
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    std::string kind_;
    ErrorClass class_;
    std::string stage_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : Error("ParseError", ErrorClass::Input,
                "parse error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset), message_(message) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t offset_;
    std::string message_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error("InputError", ErrorClass::Input, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("DomainError", ErrorClass::Numerical, what) {}
};

class OrderExceeded : public Error {
public:
    explicit OrderExceeded(int order)
        : Error("OrderExceeded", ErrorClass::Input,
                "derivative order " + std::to_string(order) + " exceeds 5") {}
};

class SingularSystem : public Error {
public:
    explicit SingularSystem(const std::string& what = "singular 4x4 system")
        : Error("SingularSystem", ErrorClass::Numerical, what) {}
};

class RankDeficient : public Error {
public:
    RankDeficient(int position, const std::string& what)
        : Error("RankDeficient", ErrorClass::Degeneracy, what), position_(position) {}

    /// 1-based position of the vector whose residual vanished.
    int position() const noexcept { return position_; }

private:
    int position_;
};

class NotRegular : public Error {
public:
    explicit NotRegular(const std::string& what) : Error("NotRegular", ErrorClass::Degeneracy, what) {}
};

class NonTransversal : public Error {
public:
    explicit NonTransversal(const std::string& what)
        : Error("NonTransversal", ErrorClass::Degeneracy, what) {}
};

class DegenerateFrenet : public Error {
public:
    explicit DegenerateFrenet(int level)
        : Error("DegenerateFrenet", ErrorClass::Degeneracy,
                "Frenet frame degenerate at level " + std::to_string(level)),
          level_(level) {}

    /// 1: kappa1 vanishes, 2: kappa2 vanishes, 3: kappa3 vanishes.
    int level() const noexcept { return level_; }

private:
    int level_;
};

class NewtonDivergence : public Error {
public:
    NewtonDivergence(const std::string& what, long step = -1)
        : Error("NewtonDivergence", ErrorClass::Numerical, what), step_(step) {}

    /// Trace step index at which halving gave up, -1 for a standalone correction.
    long step() const noexcept { return step_; }

private:
    long step_;
};

class InsufficientTrace : public Error {
public:
    explicit InsufficientTrace(const std::string& what)
        : Error("InsufficientTrace", ErrorClass::Input, what) {}
};

} // namespace isect5
