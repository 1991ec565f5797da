#include "funcount/error.hpp"

namespace funcount {

Error::Error(const std::string& module, const std::string& message)
    : std::runtime_error(module + ": " + message), module_(module) {}

}  // namespace funcount
