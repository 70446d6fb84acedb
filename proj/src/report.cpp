#include "hypolab/report.hpp"

#include "hypolab/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hypolab {

std::string config_hash(const ProblemSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_config(spec)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ArtifactMeta ArtifactMeta::for_spec(const std::string& command, const ProblemSpec& spec, int N, int K,
                                    std::uint64_t seed) {
  ArtifactMeta m;
  m.command = command;
  m.preset = spec.name;
  m.config_hash = hypolab::config_hash(spec);
  m.hermite_N = N;
  m.fourier_K = K;
  m.seed = seed;
  return m;
}

Json ArtifactMeta::to_json() const {
  Json j;
  j["tool"] = "hypolab";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["preset"] = preset;
  j["config_hash"] = config_hash;
  j["truncation"] = {{"hermite_N", hermite_N}, {"fourier_K", fourier_K}};
  j["seed"] = seed;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw ConfigError("report", "CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

void CsvTable::add_numbers(const std::vector<double>& row) {
  std::vector<std::string> s;
  s.reserve(row.size());
  for (double x : row) s.push_back(format_number(x));
  add(std::move(s));
}

std::string CsvTable::render(const ArtifactMeta& meta) const {
  std::ostringstream os;
  os << "# " << meta.to_json().dump() << "\r\n";
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(r[i]);
    os << "\r\n";
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("report", "cannot write " + path);
  f << text;
  if (!f) throw ConfigError("report", "write failed for " + path);
}

}  // namespace

void CsvTable::write(const std::string& path, const ArtifactMeta& meta) const { write_text(path, render(meta)); }

void write_json(const std::string& path, const ArtifactMeta& meta, const Json& body) {
  Json j;
  j["meta"] = meta.to_json();
  j["result"] = body;
  write_text(path, j.dump(2) + "\n");
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("report", "output directory '" + dir + "' cannot be created");
  const auto probe = std::filesystem::path(dir) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("report", "output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_sidecar(const std::string& dir, const std::string& command, const std::vector<std::string>& argv,
                   double seconds) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json j;
  j["command"] = command;
  j["timestamp"] = stamp;
  j["argv"] = argv;
  j["seconds"] = seconds;
  write_text((std::filesystem::path(dir) / (command + ".run.json")).string(), j.dump(2) + "\n");
}

Json to_json(const Vec& v) {
  Json j = Json::array();
  for (long i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json to_json(const Mat& m) {
  Json j = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

}  // namespace hypolab
