#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "torbill/billiard.hpp"
#include "torbill/torus_domain.hpp"

namespace torbill::cli {

inline constexpr const char* kToolName = "torbill";
inline constexpr const char* kToolVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurveConfig {
  std::string kind = "circle";
  double major_radius = 2.0;
  double minor_radius = 1.0;
  double center = 4.0;
  double semi_rho = 2.0;
  double semi_z = 1.0;
  std::vector<Vec2> samples;  ///< (rho, z) points of a closed convex curve
};

struct RunConfig {
  CurveConfig curve;
  double root_tol = 1e-10;
  double graze_threshold = 1e-7;
  double zh_band = 1e-3;
  int max_bounces = 10000;
  double max_length = 1e4;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out = "-";
  std::string format = "auto";  ///< auto, csv or jsonl
};

/// Parses a config document. Unknown keys and invalid values raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

/// Canonical form without the output block.
nlohmann::json to_json(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

ToroidalDomain make_domain(const RunConfig& cfg);
Caps make_caps(const RunConfig& cfg);

/// Formats a double so that it reads back to the same value.
std::string format_double(double x);

/// Table or event stream writer. The first line is a metadata record.
class RecordWriter {
 public:
  enum class Format { Csv, Jsonl };

  RecordWriter(std::ostream& os, Format format, const RunConfig& cfg, const std::string& command);

  /// Extra JSONL record (ignored for CSV).
  void record(const nlohmann::ordered_json& obj);
  /// Table row; the CSV header is taken from the first row.
  void row(const nlohmann::ordered_json& obj);

 private:
  std::ostream& os_;
  Format format_;
  bool header_done_ = false;
};

RecordWriter::Format resolve_format(const RunConfig& cfg, RecordWriter::Format fallback);

}  // namespace torbill::cli
