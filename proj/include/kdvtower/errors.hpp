#ifndef KDVTOWER_ERRORS_HPP
#define KDVTOWER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kdvtower {

// Regularity bookkeeping violation: an operation asked for more derivatives
// than the element's declared level provides, or a base dropped below the
// admissible floor.
class level_error : public std::runtime_error {
public:
    explicit level_error(const std::string& what) : std::runtime_error(what) {}
};

// Two elements live on different spectral grids.
class grid_error : public std::runtime_error {
public:
    explicit grid_error(const std::string& what) : std::runtime_error(what) {}
};

// Pipeline/type-composition failure; carries the two mismatched levels.
class type_error : public std::runtime_error {
public:
    type_error(const std::string& what, int produced, int required)
        : std::runtime_error(what), produced_level(produced), required_level(required) {}
    int produced_level;
    int required_level;
};

// Invalid run configuration (CLI surface maps this to exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kdvtower

#endif
