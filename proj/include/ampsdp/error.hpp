#pragma once

#include <stdexcept>
#include <string>

namespace ampsdp {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class unsupported_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a computation would exceed a configured size cap.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class divergence_error : public numerical_error {
public:
    divergence_error(int step, const std::string& what)
        : numerical_error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace ampsdp
