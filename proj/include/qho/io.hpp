#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qho/hampoly.hpp"

namespace qho::io {

using json = nlohmann::json;

json read_json(const std::filesystem::path& path);
// Two-space indent, trailing newline; doubles in shortest round-trip form.
void write_json(const std::filesystem::path& path, const json& j);

// Shortest decimal that reads back to the same double.
std::string format_double(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void close();
  ~CsvWriter();

 private:
  std::filesystem::path path_;
  std::string buf_;
  std::size_t cols_;
  bool open_ = true;
};

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const;
};

Csv read_csv(const std::filesystem::path& path);

// Existing, writable directory: `requested` if given, else $QHO_OUTPUT_DIR, else the working directory.
std::filesystem::path output_dir(const std::string& requested);

json to_json(const hampoly::HamPoly& h);
hampoly::HamPoly hampoly_from_json(const json& j);

}  // namespace qho::io
