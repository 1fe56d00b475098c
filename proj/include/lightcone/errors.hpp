#pragma once

#include <stdexcept>
#include <string>

namespace lc {

// Every failure raised by the library derives from Error and carries the
// process exit code the command-line tool maps it to.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
  int exit_code() const noexcept { return code_; }

 private:
  int code_;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int usage = 2;
inline constexpr int parse = 3;
inline constexpr int unknown_key = 4;
inline constexpr int range = 5;
inline constexpr int io = 6;
inline constexpr int domain = 7;
inline constexpr int numerical = 8;
inline constexpr int internal = 9;
}  // namespace exit_code

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain error: " + w, exit_code::domain) {}
};

struct PoleError : Error {
  long index;
  PoleError(const std::string& w, long n)
      : Error("pole error: " + w + " (n=" + std::to_string(n) + ")", exit_code::numerical), index(n) {}
};

struct CflError : Error {
  explicit CflError(const std::string& w) : Error("CFL violation: " + w, exit_code::numerical) {}
};

struct HyperbolicityError : Error {
  explicit HyperbolicityError(const std::string& w)
      : Error("loss of hyperbolicity: " + w, exit_code::numerical) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error("numerical error: " + w, exit_code::numerical) {}
};

struct ConfigError : Error {
  ConfigError(const std::string& w, int code) : Error(w, code) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("I/O error: " + w, exit_code::io) {}
};

}  // namespace lc
