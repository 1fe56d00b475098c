#include "lightcone/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "lightcone/errors.hpp"

namespace lc {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("SHA-256 computation failed", exit_code::internal);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return sha256_hex(os.str());
}

std::string write_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw IoError("failed writing " + path);
  return sha256_hex(content);
}

std::string write_series(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& schema,
                         const std::string& path) {
  if (schema.empty()) throw DomainError("CSV schema must have at least one column");
  std::string out;
  for (std::size_t i = 0; i < schema.size(); ++i) out += (i ? "," : "") + schema[i];
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size())
      throw DomainError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                        " fields, schema arity is " + std::to_string(schema.size()));
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) out += ',';
      out += format_double(rows[r][i]);
    }
    out += '\n';
  }
  return write_text(path, out);
}

Series read_series(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  Series s;
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty CSV " + path);
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) s.schema.push_back(col);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != s.schema.size()) throw IoError("CSV row arity mismatch in " + path);
    s.rows.push_back(std::move(row));
  }
  return s;
}

}  // namespace lc
