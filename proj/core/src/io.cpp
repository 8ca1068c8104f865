#include "perifront/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace perifront {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string content_hash_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error("cannot create directory " + path + ": " + ec.message());
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "time";
  for (const auto& p : traj.probes) out << "," << p.name;
  out << "\n";
  out.precision(12);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << traj.times[k];
    for (const auto& s : traj.series) out << "," << s[k];
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_snapshot_pgm(const std::string& path, const DomainMask& mask,
                        const std::vector<double>& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  f << "P5\n" << mask.nx() << " " << mask.ny() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(mask.nx()));
  for (int j = mask.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < mask.nx(); ++i) {
      const int c = mask.cell_index(i, j);
      double v = 0.0;
      if (mask.inside(c)) v = std::clamp(u[static_cast<std::size_t>(c)], 0.0, 1.0);
      row[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    f.write(reinterpret_cast<const char*>(row.data()), mask.nx());
  }
}

void write_two_column_csv(const std::string& path, const std::string& xname,
                          const std::string& yname, const std::vector<double>& x,
                          const std::vector<double>& y) {
  std::ostringstream out;
  out << xname << "," << yname << "\n";
  out.precision(14);
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k)
    out << x[k] << "," << y[k] << "\n";
  write_text_file(path, out.str());
}

}  // namespace perifront
