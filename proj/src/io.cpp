#include "qho/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "qho/error.hpp"

namespace qho::io {

namespace fs = std::filesystem;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), cols_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) buf_ += (i ? "," : "") + header[i];
  buf_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != cols_) throw Error("csv row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += format_double(values[i]);
  }
  buf_ += '\n';
}

void CsvWriter::close() {
  if (!open_) return;
  open_ = false;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path_.string());
  out << buf_;
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

std::size_t Csv::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("csv has no column " + name);
}

Csv read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  Csv c;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv " + path.string());
  {
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) c.header.push_back(f);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
      double x = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), x);
      if (res.ec != std::errc()) throw ConfigError("bad number '" + f + "' in " + path.string());
      r.push_back(x);
    }
    if (r.size() != c.header.size()) throw ConfigError("ragged csv " + path.string());
    c.rows.push_back(std::move(r));
  }
  return c;
}

fs::path output_dir(const std::string& requested) {
  fs::path dir = requested;
  if (dir.empty()) {
    const char* env = std::getenv("QHO_OUTPUT_DIR");
    dir = env && *env ? fs::path(env) : fs::current_path();
  }
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw ConfigError("output directory " + dir.string() + " does not exist");
  if (::access(dir.c_str(), W_OK) != 0) throw ConfigError("output directory " + dir.string() + " is not writable");
  return dir;
}

json to_json(const hampoly::HamPoly& h) {
  json terms = json::array();
  const int r = h.half_degree();
  for (const auto& [k, c] : h.coeffs()) {
    const auto o = hampoly::unpack(r, k);
    terms.push_back({{"j", o.j}, {"l", o.l}, {"re", c.real()}, {"im", c.imag()}});
  }
  return {{"M", h.modes()}, {"r", r}, {"terms", terms}};
}

hampoly::HamPoly hampoly_from_json(const json& j) {
  try {
    const auto M = j.at("M").get<std::size_t>();
    const int r = j.at("r").get<int>();
    hampoly::HamPoly h(M, r);
    for (const auto& t : j.at("terms")) {
      const auto a = t.at("j").get<std::vector<std::size_t>>();
      const auto b = t.at("l").get<std::vector<std::size_t>>();
      if (a.size() != static_cast<std::size_t>(r) || b.size() != static_cast<std::size_t>(r))
        throw ConfigError("term length does not match r");
      for (auto x : a)
        if (x < 1 || x > M) throw ConfigError("term index out of range");
      for (auto x : b)
        if (x < 1 || x > M) throw ConfigError("term index out of range");
      h.add(hampoly::make_key(r, a, b), {t.at("re").get<double>(), t.value("im", 0.0)});
    }
    if (!h.is_real(1e-12)) throw ConfigError("polynomial is not real: conjugate terms must be listed");
    return h;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed polynomial: ") + e.what());
  }
}

}  // namespace qho::io
