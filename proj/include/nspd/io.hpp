#pragma once

// Binary field snapshots and CSV tables.
//
// Snapshot layout (little-endian):
//   "NSPD1\0" | u32 dim | u32 components | u32 n_per_axis | u64 payload bytes |
//   float64 physical samples, grid points row-major, components fastest.

#include <string>
#include <vector>

#include "nspd/diagnostics.hpp"
#include "nspd/studies.hpp"
#include "nspd/torus.hpp"

namespace nspd {

struct Snapshot {
  int dim = 2;
  int n = 0;
  PhysicalField field;  // component-major in memory
};

inline constexpr std::size_t kSnapshotHeaderBytes = 6 + 4 + 4 + 4 + 8;

std::string encode_snapshot(const Snapshot& s);
/// Throws FormatError naming the byte offset of the first problem.
Snapshot decode_snapshot(const std::string& bytes);

Snapshot make_snapshot(const SpectralField& f);
void write_snapshot(const SpectralField& f, const std::string& path);
void write_snapshot(const Snapshot& s, const std::string& path);
Snapshot read_snapshot(const std::string& path);

/// Shortest round-trip decimal form; "nan" and "inf" spelled out.
std::string format_double(double x);

/// Per-row diagnostics of one trajectory.
std::string trajectory_csv(const TrajectoryRecord& rec);
/// Header of the per-trajectory summary table for `n_thresholds` levels.
std::string summary_csv_header(std::size_t n_thresholds);
std::string summary_csv_row(const TrajectoryRecord& rec, double amplitude);
std::string survival_csv(const std::vector<SurvivalCurve>& curves);
std::string convergence_csv(const ConvergenceReport& rep);

/// Writes `text` to `path`, creating parent directories. Throws
/// std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

/// Minimal CSV reader used by tests and tools: header plus rows of cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);

}  // namespace nspd
