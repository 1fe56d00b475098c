#pragma once

#include <string>
#include <vector>

namespace lc {

/// Shortest round-trip form with 17 significant digits.
std::string format_double(double x);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Writes text with LF line endings; returns the SHA-256 digest of the bytes.
std::string write_text(const std::string& path, const std::string& content);

/// CSV with a header row. Every row must have the schema's arity.
std::string write_series(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& schema,
                         const std::string& path);

struct Series {
  std::vector<std::string> schema;
  std::vector<std::vector<double>> rows;
};

Series read_series(const std::string& path);

}  // namespace lc
