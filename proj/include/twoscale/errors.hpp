#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twoscale {

/// Raised for degenerate or inconsistent geometry (rectangles, triangles).
class InvalidGeometry : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Boundary tags that violate the macro/micro partition rules.
class InvalidTagging : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested boundary tag has no edges on the mesh.
class InvalidTag : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameter or configuration validation failure. Carries every violated
/// constraint, not only the first.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> messages)
      : std::invalid_argument(join(messages)), messages_(std::move(messages)) {}

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& messages) {
    std::string out;
    for (const auto& m : messages) out += (out.empty() ? "" : "; ") + m;
    return out;
  }
  std::vector<std::string> messages_;
};

/// Iterative solver (CG or Picard) failed to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t iterations, double residual)
      : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                           ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

}  // namespace twoscale
