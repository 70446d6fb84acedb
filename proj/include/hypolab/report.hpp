#pragma once

#include "hypolab/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hypolab {

using Json = nlohmann::ordered_json;

// FNV-1a 64 of the canonical config text, as 16 hex digits.
std::string config_hash(const ProblemSpec& spec);

// Header carried by every artifact. No timestamps: bodies are byte-identical across reruns.
struct ArtifactMeta {
  std::string command;
  std::string preset;
  std::string config_hash;
  int hermite_N = 0, fourier_K = 0;
  std::uint64_t seed = 0;
  Json extra = Json::object();

  static ArtifactMeta for_spec(const std::string& command, const ProblemSpec& spec, int N, int K,
                               std::uint64_t seed);
  Json to_json() const;
};

// RFC 4180 table; the first line is "# " followed by the metadata as one-line JSON.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add(std::vector<std::string> row);
  void add_numbers(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string render(const ArtifactMeta& meta) const;
  void write(const std::string& path, const ArtifactMeta& meta) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Shortest decimal that round-trips (%.17g fallback); "nan"/"inf" for non-finite values.
std::string format_number(double x);
std::string csv_escape(const std::string& field);

// {"meta": ..., "result": body}, two-space indented, trailing newline.
void write_json(const std::string& path, const ArtifactMeta& meta, const Json& body);

// Creates the directory (and parents); throws ConfigError when it cannot be written.
void ensure_output_dir(const std::string& dir);

// Run record beside the artifacts (<dir>/<command>.run.json): wall-clock timestamp, argv, runtime.
void write_sidecar(const std::string& dir, const std::string& command, const std::vector<std::string>& argv,
                   double seconds);

Json to_json(const Vec& v);
Json to_json(const Mat& m);

}  // namespace hypolab
