#include "mreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <openssl/evp.h>

#include "mreg/errors.hpp"

namespace mreg {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw ConfigError("write failed for '" + p.string() + "'");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw StructuralError("CSV row width does not match the header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  auto esc = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
    return o + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + esc(r[i]);
    out += "\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  const double W = 640, H = 420, left = 80, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.logx || x > 0) && (!spec.logy || y > 0);
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (ok(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) {
    const double pad = std::max(0.5, 0.05 * std::abs(y0));
    y0 -= pad;
    y1 += pad;
  }
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(spec.title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
    const double gx = left + pw * k / 4, gy = top + ph - ph * k / 4;
    o << "<line x1=\"" << num(gx) << "\" y1=\"" << top << "\" x2=\"" << num(gx) << "\" y2=\"" << top + ph
      << "\" stroke=\"#ddd\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << num(gy) << "\" x2=\"" << left + pw << "\" y2=\"" << num(gy)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << num(gx) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << tick_label(spec.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
      << tick_label(spec.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
    << xml_escape(spec.xlabel) << "</text>\n";
  o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(spec.ylabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* col = kColors[s % std::size(kColors)];
    std::string pts;
    for (std::size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i)
      if (ok(series[s].x[i], series[s].y[i]))
        pts += num(px(series[s].x[i])) + "," + num(py(series[s].y[i])) + " ";
    if (!pts.empty()) pts.pop_back();
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    for (std::size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i)
      if (ok(series[s].x[i], series[s].y[i]))
        o << "<circle cx=\"" << num(px(series[s].x[i])) << "\" cy=\"" << num(py(series[s].y[i]))
          << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << left + pw + 32 << "\" y2=\""
      << num(ly - 4) << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << num(ly) << "\">" << xml_escape(series[s].label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

nlohmann::json version_info() {
  return {{"mreg", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"fftw", std::string(fftw_version)},
          {"compiler", std::string(__VERSION__)}};
}

Bundle::Bundle(std::filesystem::path dir, std::string command, const std::string& config_bytes,
               std::string config_name, std::uint64_t seed)
    : dir_(std::move(dir)),
      command_(std::move(command)),
      config_hash_(sha256_hex(config_bytes)),
      config_name_(std::move(config_name)),
      seed_(seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_))
    throw ConfigError("output directory '" + dir_.string() + "' cannot be created");
}

void Bundle::add(const std::string& name, const std::string& content) {
  write_file(dir_ / name, content);
  artifacts_.emplace_back(name, sha256_hex(content));
}

void Bundle::finish(const nlohmann::json& extra) {
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& [n, h] : artifacts_) arts.push_back({{"name", n}, {"sha256", h}});
  nlohmann::json m = {{"schema_version", kManifestSchema},
                      {"command", command_},
                      {"config", {{"name", config_name_}, {"sha256", config_hash_}}},
                      {"seed", seed_},
                      {"versions", version_info()},
                      {"artifacts", arts}};
  if (!extra.empty()) m["summary"] = extra;
  write_file(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace mreg
