#include "nozzle/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

bool JobRecord::passed() const {
  return status == "ok" && std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

bool RunManifest::passed() const {
  return std::all_of(jobs.begin(), jobs.end(), [](const JobRecord& j) { return j.passed(); });
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["passed"] = passed();
  j["artifacts"] = artifacts;
  j["jobs"] = nlohmann::json::array();
  for (const auto& job : jobs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : job.assertions) a.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
    j["jobs"].push_back({{"name", job.name},
                         {"status", job.status},
                         {"message", job.message},
                         {"wall_clock_s", job.wall_clock},
                         {"assertions", a},
                         {"summary", job.summary}});
  }
  return j;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) fail(ErrorKind::IncompatibleData, "CSV row width differs from the header");
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
    s += "\n";
  }
  return s;
}

namespace {

std::string escape(const std::string& t) {
  std::string s;
  for (char c : t) {
    if (c == '<') s += "&lt;";
    else if (c == '>') s += "&gt;";
    else if (c == '&') s += "&amp;";
    else s += c;
  }
  return s;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  constexpr double W = 640, H = 420, L = 80, R = 160, T = 40, B = 60;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
    const double vx = spec.log_x ? std::pow(10.0, fx) : fx, vy = spec.log_y ? std::pow(10.0, fy) : fy;
    const double sx = L + (W - L - R) * k / 4, sy = H - B - (H - T - B) * k / 4;
    os << "<text x=\"" << fixed(sx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick_label(vx) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(sy + 4) << "\" text-anchor=\"end\">" << tick_label(vy) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << escape(spec.xlabel)
     << (spec.log_x ? " (log)" : "") << "</text>\n";
  os << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << (T + H - B) / 2 << ")\">" << escape(spec.ylabel) << (spec.log_y ? " (log)" : "") << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) os << fixed(px(s.x[i])) << "," << fixed(py(s.y[i])) << " ";
    os << "\"/>\n";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i]) && s.x.size() <= 40)
        os << "<circle cx=\"" << fixed(px(s.x[i])) << "\" cy=\"" << fixed(py(s.y[i])) << "\" r=\"3\" fill=\"" << col
           << "\"/>\n";
    const double ly = T + 16 * (k + 1);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 35 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

ArtifactWriter::ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) fail(ErrorKind::Configuration, "cannot create output directory " + root_.string() + ": " + ec.message());
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  const auto path = root_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) fail(ErrorKind::Configuration, "cannot write " + path.string());
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

void write_manifest(RunManifest m, ArtifactWriter& out) {
  m.artifacts = out.files();
  m.artifacts.push_back("manifest.json");
  std::sort(m.artifacts.begin(), m.artifacts.end());
  m.artifacts.erase(std::unique(m.artifacts.begin(), m.artifacts.end()), m.artifacts.end());
  out.write_json("manifest.json", m.to_json());
}

}  // namespace nozzle
