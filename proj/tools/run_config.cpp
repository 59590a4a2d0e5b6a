#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>

#include "torbill/errors.hpp"
#include "torbill/profile_curve.hpp"

namespace torbill::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const std::string& key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + key + "' in " + where);
  }
}

void read_number(const json& obj, const std::string& key, double& out, const std::string& where) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
  out = obj.at(key).get<double>();
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  check_keys(doc, "config", {"curve", "tolerances", "caps", "seed", "workers", "output"});
  if (doc.contains("curve")) {
    const json& c = doc.at("curve");
    if (!c.is_object() || !c.contains("kind")) throw ConfigError("curve needs a kind");
    read(c, "kind", cfg.curve.kind, "curve");
    if (cfg.curve.kind == "circle") {
      check_keys(c, "curve", {"kind", "major_radius", "minor_radius"});
      read_number(c, "major_radius", cfg.curve.major_radius, "curve");
      read_number(c, "minor_radius", cfg.curve.minor_radius, "curve");
    } else if (cfg.curve.kind == "ellipse") {
      check_keys(c, "curve", {"kind", "center", "semi_rho", "semi_z"});
      read_number(c, "center", cfg.curve.center, "curve");
      read_number(c, "semi_rho", cfg.curve.semi_rho, "curve");
      read_number(c, "semi_z", cfg.curve.semi_z, "curve");
    } else if (cfg.curve.kind == "custom") {
      check_keys(c, "curve", {"kind", "samples"});
      if (!c.contains("samples") || !c.at("samples").is_array()) {
        throw ConfigError("custom curve needs a samples array");
      }
      for (const auto& p : c.at("samples")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw ConfigError("curve samples must be [rho, z] pairs");
        }
        cfg.curve.samples.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
    } else {
      throw ConfigError("unknown curve kind '" + cfg.curve.kind + "'");
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    check_keys(t, "tolerances", {"root_tol", "graze_threshold", "zh_band"});
    read_number(t, "root_tol", cfg.root_tol, "tolerances");
    read_number(t, "graze_threshold", cfg.graze_threshold, "tolerances");
    read_number(t, "zh_band", cfg.zh_band, "tolerances");
  }
  if (doc.contains("caps")) {
    const json& c = doc.at("caps");
    check_keys(c, "caps", {"max_bounces", "max_length"});
    read(c, "max_bounces", cfg.max_bounces, "caps");
    read_number(c, "max_length", cfg.max_length, "caps");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be an unsigned 64-bit integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  read(doc, "workers", cfg.workers, "config");
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, "output", {"path", "format"});
    read(o, "path", cfg.out, "output");
    read(o, "format", cfg.format, "output");
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

void validate(const RunConfig& cfg) {
  if (!(cfg.root_tol > 0.0) || !(cfg.graze_threshold > 0.0) || !(cfg.zh_band > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (cfg.max_bounces < 1) throw ConfigError("caps.max_bounces must be at least 1");
  if (!(cfg.max_length > 0.0)) throw ConfigError("caps.max_length must be positive");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.format != "auto" && cfg.format != "csv" && cfg.format != "jsonl") {
    throw ConfigError("output.format must be auto, csv or jsonl");
  }
  if (cfg.curve.kind == "custom" && cfg.curve.samples.size() < 8) {
    throw ConfigError("custom curve needs at least 8 samples");
  }
}

json to_json(const RunConfig& cfg) {
  json curve{{"kind", cfg.curve.kind}};
  if (cfg.curve.kind == "circle") {
    curve["major_radius"] = cfg.curve.major_radius;
    curve["minor_radius"] = cfg.curve.minor_radius;
  } else if (cfg.curve.kind == "ellipse") {
    curve["center"] = cfg.curve.center;
    curve["semi_rho"] = cfg.curve.semi_rho;
    curve["semi_z"] = cfg.curve.semi_z;
  } else {
    json s = json::array();
    for (const auto& p : cfg.curve.samples) s.push_back({p.x(), p.y()});
    curve["samples"] = s;
  }
  return json{{"curve", curve},
              {"tolerances",
               {{"root_tol", cfg.root_tol}, {"graze_threshold", cfg.graze_threshold}, {"zh_band", cfg.zh_band}}},
              {"caps", {{"max_bounces", cfg.max_bounces}, {"max_length", cfg.max_length}}},
              {"seed", cfg.seed},
              {"workers", cfg.workers}};
}

std::uint64_t config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("workers");
  return fnv1a(j.dump());
}

ToroidalDomain make_domain(const RunConfig& cfg) {
  try {
    ToroidalDomain::Options opts;
    opts.boundary_band = cfg.root_tol;
    const auto& c = cfg.curve;
    if (c.kind == "circle") return ToroidalDomain(ProfileCurve::circle(c.major_radius, c.minor_radius), opts);
    if (c.kind == "ellipse") return ToroidalDomain(ProfileCurve::ellipse(c.center, c.semi_rho, c.semi_z), opts);
    auto raw = std::make_shared<FourierCurve>(FourierCurve::from_samples(c.samples));
    return ToroidalDomain(reparametrize_arclength(raw), opts);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid curve: ") + e.what());
  }
}

Caps make_caps(const RunConfig& cfg) {
  Caps caps;
  caps.max_bounces = cfg.max_bounces;
  caps.grazing.graze_threshold = cfg.graze_threshold;
  caps.grazing.zh_band = cfg.zh_band;
  return caps;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RecordWriter::RecordWriter(std::ostream& os, Format format, const RunConfig& cfg, const std::string& command)
    : os_(os), format_(format) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  if (format_ == Format::Csv) {
    os_ << "# tool=" << kToolName << " version=" << kToolVersion << " command=" << command
        << " config_hash=" << hash << " seed=" << cfg.seed << '\n';
  } else {
    nlohmann::ordered_json meta{{"record", "meta"}, {"tool", kToolName},  {"version", kToolVersion},
                                {"command", command}, {"config_hash", hash}, {"seed", cfg.seed}};
    os_ << meta.dump() << '\n';
  }
}

void RecordWriter::record(const nlohmann::ordered_json& obj) {
  if (format_ == Format::Jsonl) os_ << obj.dump() << '\n';
}

void RecordWriter::row(const nlohmann::ordered_json& obj) {
  if (format_ == Format::Jsonl) {
    os_ << obj.dump() << '\n';
    return;
  }
  std::vector<std::string> keys, values;
  auto cell = [](const nlohmann::ordered_json& v) -> std::string {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    return v.dump();
  };
  for (const auto& [key, value] : obj.items()) {
    if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        keys.push_back(key + "_" + std::to_string(i));
        values.push_back(cell(value[i]));
      }
    } else {
      keys.push_back(key);
      values.push_back(cell(value));
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  };
  if (!header_done_) {
    line(keys);
    header_done_ = true;
  }
  line(values);
}

RecordWriter::Format resolve_format(const RunConfig& cfg, RecordWriter::Format fallback) {
  if (cfg.format == "csv") return RecordWriter::Format::Csv;
  if (cfg.format == "jsonl") return RecordWriter::Format::Jsonl;
  return fallback;
}

}  // namespace torbill::cli
