#include "gffsle/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef GFFSLE_VERSION
#define GFFSLE_VERSION "0.0.0+unknown"
#endif

namespace gffsle::io {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void header(std::ostream& out, const char* columns) { out << "# gffsle " << version() << "\n" << columns << "\n"; }

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw Error("write failed: " + file.string());
}

}  // namespace

std::string version() { return GFFSLE_VERSION; }

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

void write_driving_csv(const std::filesystem::path& file, const DrivingFunction& w) {
  auto out = open_out(file);
  header(out, "t,w");
  for (std::size_t k = 0; k < w.size(); ++k) out << num(w.times[k]) << ',' << num(w.values[k]) << '\n';
  finish(out, file);
}

void write_path_csv(const std::filesystem::path& file, std::span<const Point> points) {
  auto out = open_out(file);
  header(out, "k,x,y");
  for (std::size_t k = 0; k < points.size(); ++k) {
    out << k << ',' << num(points[k].real()) << ',' << num(points[k].imag()) << '\n';
  }
  finish(out, file);
}

void write_field_csv(const std::filesystem::path& file, const TgDomain& domain, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) != domain.num_vertices()) throw DomainError("write_field_csv: size mismatch");
  auto out = open_out(file);
  header(out, "id,x,y,value");
  for (std::size_t v = 0; v < domain.num_vertices(); ++v) {
    const Point p = domain.position(static_cast<int>(v));
    out << v << ',' << num(p.real()) << ',' << num(p.imag()) << ',' << num(values[static_cast<Eigen::Index>(v)]) << '\n';
  }
  finish(out, file);
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
  finish(out, file);
}

void write_text(const std::filesystem::path& file, std::string_view text) {
  auto out = open_out(file);
  out << text;
  finish(out, file);
}

DrivingFunction read_driving_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  DrivingFunction w;
  std::string line;
  bool columns = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!columns) {
      if (line != "t,w") throw DomainError("read_driving_csv: expected header t,w in " + file.string());
      columns = true;
      continue;
    }
    std::istringstream row(line);
    double t = 0.0, v = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> v) || comma != ',') throw DomainError("read_driving_csv: bad row '" + line + "'");
    w.times.push_back(t);
    w.values.push_back(v);
  }
  w.validate();
  return w;
}

}  // namespace gffsle::io
