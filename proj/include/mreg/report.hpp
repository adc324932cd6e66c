#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mreg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kManifestSchema = 1;

std::string sha256_hex(const std::string& bytes);

// Whole-file I/O; failures are ConfigError with the path in the message.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

// Fixed %.9e so CSV output is reproducible byte for byte.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
};

// Standalone SVG line chart with markers and a legend. Non-finite or (on log axes)
// non-positive points are skipped.
std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series);

// Writes artifacts into one directory and records their hashes for the manifest.
class Bundle {
 public:
  Bundle(std::filesystem::path dir, std::string command, const std::string& config_bytes, std::string config_name,
         std::uint64_t seed);
  void add(const std::string& name, const std::string& content);
  // Writes manifest.json listing every artifact added so far.
  void finish(const nlohmann::json& extra = nlohmann::json::object());
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string command_, config_hash_, config_name_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> artifacts_;  // name, sha256
};

nlohmann::json version_info();

}  // namespace mreg
