#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "perifront/geometry.hpp"
#include "perifront/solver.hpp"

namespace perifront {

inline constexpr const char* kVersion = "perifront 0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string content_hash_hex(std::string_view bytes);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);

// probes.csv: time column plus one column per probe
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// u in [0,1] scaled to 8-bit grayscale, outside cells black
void write_snapshot_pgm(const std::string& path, const DomainMask& mask,
                        const std::vector<double>& u);

void write_two_column_csv(const std::string& path, const std::string& xname,
                          const std::string& yname, const std::vector<double>& x,
                          const std::vector<double>& y);

}  // namespace perifront
