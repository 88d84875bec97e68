#pragma once

#include <isomat/grid.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

// Matrix CSV interchange: no header, one matrix row per line, comma
// separated, '\n' line ends. Values are written with std::to_chars, i.e. the
// shortest decimal string that round-trips, so write(read(f)) is byte
// identical for files we produced.

namespace isomat {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline GridMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "' for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string tok = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const char* b = tok.data();
      const char* e = tok.data() + tok.size();
      while (b < e && (*b == ' ' || *b == '\t')) ++b;
      while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
      double v = 0;
      auto res = std::from_chars(b, e, v);
      if (res.ec != std::errc() || res.ptr != e || b == e) {
        throw CsvError("'" + path + "': cannot parse field '" + tok + "'");
      }
      if (!std::isfinite(v)) throw CsvError("'" + path + "': non-finite entry");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw CsvError("'" + path + "': ragged rows (" + std::to_string(row.size()) + " vs " +
                     std::to_string(rows.front().size()) + " fields)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError("'" + path + "': empty matrix");
  GridMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

inline std::string matrix_to_csv(const GridMatrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

// Write via a temp file in the same directory plus rename, so readers never
// observe a partially written file.
inline void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CsvError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw CsvError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw CsvError("cannot rename temp file onto '" + path + "': " + ec.message());
  }
}

inline void write_matrix_csv(const std::string& path, const GridMatrix& m) {
  atomic_write_text(path, matrix_to_csv(m));
}

}  // namespace isomat
