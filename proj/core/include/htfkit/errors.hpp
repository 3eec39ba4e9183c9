#pragma once

#include <stdexcept>
#include <string>

namespace htfkit {

// Malformed user input: bad file, bad key, inconsistent shapes, bad arguments.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: singular matrix, resolvent pole hit, ill-conditioning.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Indeterminate analysis outcome: a root/crossover search found no sign change.
class no_crossover_error : public std::runtime_error {
public:
    explicit no_crossover_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace htfkit
