#pragma once

#include <stdexcept>
#include <string>

namespace eckart {

// quadrature/series failure; carries a module tag for diagnostics
class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}
  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

}  // namespace eckart
