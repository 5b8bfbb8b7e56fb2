#include "nspd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nspd/error.hpp"

namespace nspd {

namespace {

constexpr char kMagic[6] = {'N', 'S', 'P', 'D', '1', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const std::string& in, std::size_t off, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_snapshot(const Snapshot& s) {
  const PhysicalField& f = s.field;
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(s.dim));
  put_u32(out, static_cast<std::uint32_t>(f.components));
  put_u32(out, static_cast<std::uint32_t>(s.n));
  put_u64(out, static_cast<std::uint64_t>(f.data.size()) * 8u);
  out.reserve(out.size() + f.data.size() * 8);
  for (std::size_t p = 0; p < f.points; ++p)
    for (int c = 0; c < f.components; ++c) {
      std::uint64_t bits = 0;
      const double x = f.at(c, p);
      std::memcpy(&bits, &x, sizeof bits);
      put_u64(out, bits);
    }
  return out;
}

Snapshot decode_snapshot(const std::string& in) {
  for (std::size_t i = 0; i < sizeof kMagic; ++i) {
    if (i >= in.size()) throw FormatError("snapshot truncated inside magic", in.size());
    if (in[i] != kMagic[i]) throw FormatError("bad snapshot magic", i);
  }
  if (in.size() < kSnapshotHeaderBytes) throw FormatError("snapshot header truncated", in.size());
  Snapshot s;
  s.dim = static_cast<int>(get_le(in, 6, 4));
  const auto comps = static_cast<int>(get_le(in, 10, 4));
  s.n = static_cast<int>(get_le(in, 14, 4));
  const std::uint64_t payload = get_le(in, 18, 8);
  if (s.dim != 2 && s.dim != 3) throw FormatError("snapshot dim must be 2 or 3", 6);
  if (comps < 1 || comps > 64) throw FormatError("snapshot component count out of range", 10);
  if (s.n < 1 || s.n > (1 << 16)) throw FormatError("snapshot grid size out of range", 14);
  std::size_t points = 1;
  for (int j = 0; j < s.dim; ++j) points *= static_cast<std::size_t>(s.n);
  const std::uint64_t expected = static_cast<std::uint64_t>(points) * static_cast<std::uint64_t>(comps) * 8u;
  if (payload != expected) throw FormatError("snapshot payload length does not match its header", 18);
  if (in.size() < kSnapshotHeaderBytes + payload)
    throw FormatError("snapshot payload truncated", in.size());
  if (in.size() > kSnapshotHeaderBytes + payload)
    throw FormatError("trailing bytes after snapshot payload", kSnapshotHeaderBytes + payload);
  s.field = PhysicalField(comps, points);
  std::size_t off = kSnapshotHeaderBytes;
  for (std::size_t p = 0; p < points; ++p)
    for (int c = 0; c < comps; ++c) {
      const std::uint64_t bits = get_le(in, off, 8);
      double x = 0.0;
      std::memcpy(&x, &bits, sizeof x);
      s.field.at(c, p) = x;
      off += 8;
    }
  return s;
}

Snapshot make_snapshot(const SpectralField& f) {
  Snapshot s;
  s.dim = f.torus()->dim();
  s.n = f.torus()->n();
  s.field = f.torus()->to_physical(f);
  return s;
}

void write_snapshot(const SpectralField& f, const std::string& path) { write_snapshot(make_snapshot(f), path); }

void write_snapshot(const Snapshot& s, const std::string& path) { write_text_file(path, encode_snapshot(s)); }

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_snapshot(buf.str());
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
  std::string out =
      "t[1],v_norm_V[1],e_norm_E[1],max_constraint_dev[1],y_minus[1],z_plus[1],energy_L2sq[1],"
      "divergence_ratio[1],grad_d_linf[1]\n";
  for (const RecordRow& r : rec.rows) {
    for (double x : {r.t, r.v_norm, r.e_norm, r.max_constraint_dev, r.y_minus, r.z_plus, r.energy, r.divergence}) {
      out += format_double(x);
      out += ',';
    }
    out += format_double(r.grad_d_linf);
    out += '\n';
  }
  return out;
}

std::string summary_csv_header(std::size_t n_thresholds) {
  std::string out =
      "trajectory,amplitude[1],status,steps,final_t[1],final_v_norm_V[1],max_divergence_ratio[1],"
      "max_constraint_dev[1]";
  for (std::size_t m = 0; m < n_thresholds; ++m) out += ",tau_" + std::to_string(m + 1) + "[1]";
  out += ",config_hash\n";
  return out;
}

std::string summary_csv_row(const TrajectoryRecord& rec, double amplitude) {
  std::string out = std::to_string(rec.trajectory) + ',' + format_double(amplitude) + ',' + to_string(rec.status) +
                    ',' + std::to_string(rec.steps_taken);
  const RecordRow last = rec.rows.empty() ? RecordRow{} : rec.rows.back();
  for (double x : {last.t, last.v_norm, rec.max_divergence_ratio, rec.max_constraint_dev}) out += ',' + format_double(x);
  for (double t : rec.tau) out += ',' + format_double(t);
  out += ',' + rec.config_hash + '\n';
  return out;
}

std::string survival_csv(const std::vector<SurvivalCurve>& curves) {
  std::string out = "amplitude[1],t[1],survival[1],wilson_lower[1],wilson_upper[1],n\n";
  for (const SurvivalCurve& c : curves)
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      out += std::isnan(c.amplitude) ? std::string("all") : format_double(c.amplitude);
      for (double x : {c.t[i], c.survival[i], c.lower[i], c.upper[i]}) out += ',' + format_double(x);
      out += ',' + std::to_string(c.n) + '\n';
    }
  return out;
}

std::string convergence_csv(const ConvergenceReport& rep) {
  std::string out = "dt[1],strong_error_V[1],constraint_drift[1]\n";
  for (std::size_t i = 0; i < rep.dt.size(); ++i)
    out += format_double(rep.dt[i]) + ',' + format_double(rep.strong_error[i]) + ',' +
           format_double(rep.constraint_drift[i]) + '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path);
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

}  // namespace nspd
