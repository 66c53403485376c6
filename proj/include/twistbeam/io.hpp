#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistbeam/decomposition.hpp"
#include "twistbeam/grid.hpp"

namespace twistbeam::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

enum class Format { csv, jsonl };

Format parse_format(const std::string& s);
std::string extension(Format f);

/// %.17g
std::string format_double(double v);

/// Row writer for CSV (header line plus comma separated values) or JSON lines
/// (one object per row keyed by column name).
class TableWriter {
 public:
  TableWriter(const std::filesystem::path& path, std::vector<std::string> columns, Format format);
  void row(const std::vector<double>& values);
  void close();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> columns_;
  Format format_;
  std::ofstream out_;
};

/// 64-bit FNV-1a of a string.
std::uint64_t fnv1a(const std::string& s);
/// Hex FNV-1a of the canonical (sorted-key, compact) dump of a configuration.
std::string config_hash(const json& config);

/// Writes <output>.provenance.json next to an output file.
std::filesystem::path write_sidecar(const std::filesystem::path& output, const json& config, const std::string& command,
                                    const json& tolerances);

void write_json(const std::filesystem::path& path, const json& doc);

/// Spectrum table "n,l,re,im" plus metadata JSON (truncation, norms, omega0).
void write_spectrum(const std::filesystem::path& table, const std::filesystem::path& metadata, const ModeSpectrum& spec,
                    Format format = Format::csv);
json spectrum_metadata(const ModeSpectrum& spec);
/// Reads a CSV spectrum and its metadata back. Throws ConfigError on malformed input.
ModeSpectrum read_spectrum(const std::filesystem::path& table, const std::filesystem::path& metadata);

/// Polar samples "rho,phi,re,im".
void write_polar(const std::filesystem::path& path, const StateGrid& grid, Format format = Format::csv);

}  // namespace twistbeam::io
