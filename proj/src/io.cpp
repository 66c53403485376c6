#include "twistbeam/io.hpp"

#include <cstdio>
#include <sstream>

#include "twistbeam/errors.hpp"

namespace twistbeam::io {

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  throw ConfigError("unknown output format '" + s + "' (expected csv or jsonl)");
}

std::string extension(Format f) { return f == Format::csv ? ".csv" : ".jsonl"; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TableWriter::TableWriter(const std::filesystem::path& path, std::vector<std::string> columns, Format format)
    : path_(path), columns_(std::move(columns)), format_(format) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::binary);
  if (!out_) throw ConfigError("cannot open " + path_.string() + " for writing");
  if (format_ == Format::csv) {
    for (std::size_t k = 0; k < columns_.size(); ++k) out_ << (k ? "," : "") << columns_[k];
    out_ << '\n';
  }
}

void TableWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw ConfigError("table row has the wrong number of columns");
  if (format_ == Format::csv) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
  } else {
    // Keys in column order, numbers at full precision.
    out_ << '{';
    for (std::size_t k = 0; k < values.size(); ++k)
      out_ << (k ? "," : "") << '"' << columns_[k] << "\":" << format_double(values[k]);
    out_ << '}';
  }
  out_ << '\n';
}

void TableWriter::close() {
  out_.close();
  if (!out_) throw ConfigError("failed writing " + path_.string());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

std::filesystem::path write_sidecar(const std::filesystem::path& output, const json& config, const std::string& command,
                                    const json& tolerances) {
  json doc;
  doc["file"] = output.filename().string();
  doc["command"] = command;
  doc["config_hash"] = config_hash(config);
  doc["versions"] = {{"twistbeam", kVersion},
                     {"fields", kVersion},
                     {"envelope", kVersion},
                     {"lgbasis", kVersion},
                     {"decomposition", kVersion},
                     {"propagation", kVersion},
                     {"oracle", kVersion},
                     {"cli", kVersion}};
  doc["tolerances"] = tolerances;
  doc["number_format"] = "%.17g";
  auto side = output;
  side += ".provenance.json";
  write_json(side, doc);
  return side;
}

json spectrum_metadata(const ModeSpectrum& spec) {
  json m;
  m["truncation"] = {{"n_max", spec.truncation.n_max}, {"l_min", spec.truncation.l_min}, {"l_max", spec.truncation.l_max}};
  m["captured_norm"] = spec.captured_norm;
  m["source_norm"] = spec.source_norm;
  m["deficit"] = spec.deficit();
  m["omega0"] = spec.convention.omega0;
  m["entries"] = spec.entries.size();
  m["warnings"] = spec.warnings;
  return m;
}

void write_spectrum(const std::filesystem::path& table, const std::filesystem::path& metadata, const ModeSpectrum& spec,
                    Format format) {
  TableWriter w(table, {"n", "l", "re", "im"}, format);
  for (const auto& [idx, c] : spec.entries) w.row({double(idx.n), double(idx.l), c.real(), c.imag()});
  w.close();
  write_json(metadata, spectrum_metadata(spec));
}

ModeSpectrum read_spectrum(const std::filesystem::path& table, const std::filesystem::path& metadata) {
  std::ifstream meta_in(metadata);
  if (!meta_in) throw ConfigError("cannot open " + metadata.string());
  json m;
  try {
    meta_in >> m;
  } catch (const json::exception& e) {
    throw ConfigError(metadata.string() + ": " + e.what());
  }
  ModeSpectrum spec;
  try {
    spec.truncation = {m.at("truncation").at("n_max").get<int>(), m.at("truncation").at("l_min").get<int>(),
                       m.at("truncation").at("l_max").get<int>()};
    spec.convention.omega0 = m.at("omega0").get<double>();
    spec.source_norm = m.at("source_norm").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(metadata.string() + ": " + e.what());
  }
  spec.truncation.validate();
  spec.convention.validate();

  std::ifstream in(table);
  if (!in) throw ConfigError("cannot open " + table.string());
  std::string line;
  if (!std::getline(in, line) || line != "n,l,re,im") throw ConfigError(table.string() + ": expected header n,l,re,im");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell[4];
    for (auto& c : cell)
      if (!std::getline(ss, c, ',')) throw ConfigError(table.string() + ": short row at line " + std::to_string(lineno));
    try {
      const ModeIndex idx{std::stoi(cell[0]), std::stoi(cell[1])};
      if (!spec.truncation.contains(idx))
        throw ConfigError(table.string() + ": mode outside truncation at line " + std::to_string(lineno));
      spec.entries[idx] = {std::stod(cell[2]), std::stod(cell[3])};
    } catch (const std::logic_error&) {
      throw ConfigError(table.string() + ": bad number at line " + std::to_string(lineno));
    }
  }
  spec.recompute_captured_norm();
  return spec;
}

void write_polar(const std::filesystem::path& path, const StateGrid& grid, Format format) {
  TableWriter w(path, {"rho", "phi", "re", "im"}, format);
  for (std::size_t i = 0; i < grid.n_rho(); ++i)
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const auto v = grid.at(i, j);
      w.row({grid.rho[i], grid.phi[j], v.real(), v.imag()});
    }
  w.close();
}

}  // namespace twistbeam::io
