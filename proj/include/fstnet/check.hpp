#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace fstnet {

// Malformed or missing external input (files, manifests, datasets).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where finite ones are required (e.g. NaN loss abort).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

}  // namespace detail

// Contract violation -> std::invalid_argument with a diagnostic message.
template <typename... Args>
void require(bool cond, Args&&... parts) {
    if (!cond) throw std::invalid_argument(detail::concat(std::forward<Args>(parts)...));
}

template <typename... Args>
void require_data(bool cond, Args&&... parts) {
    if (!cond) throw DataError(detail::concat(std::forward<Args>(parts)...));
}

}  // namespace fstnet
