#ifndef PRECONDNET_ERROR_HPP
#define PRECONDNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace precondnet {

/// Thrown on contract violations (dimension mismatches, bad input files,
/// non-SPD operands, singular factors).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace precondnet

#endif
