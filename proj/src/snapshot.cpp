#include "cqw/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "cqw/format.hpp"

namespace cqw {

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("snapshot is truncated");
  return to_little(v);
}

}  // namespace

Snapshot to_snapshot(const SpinorField& psi) {
  return {psi.kind(), static_cast<std::uint32_t>(psi.grid.n1()), static_cast<std::uint32_t>(psi.grid.n2()), 1,
          psi.data};
}

Snapshot to_snapshot(const EdgeField& psi) {
  return {LatticeKind::triangular, static_cast<std::uint32_t>(psi.n1), static_cast<std::uint32_t>(psi.n2), 3,
          psi.data};
}

void write_snapshot(std::ostream& out, const Snapshot& s) {
  if (s.data.size() != static_cast<std::size_t>(s.n1) * s.n2 * s.spinors_per_cell)
    throw ShapeMismatch("snapshot payload does not match its header");
  out.write("CQW1", 4);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.kind));
  put<std::uint32_t>(out, s.n1);
  put<std::uint32_t>(out, s.n2);
  put<std::uint32_t>(out, s.spinors_per_cell);
  for (const Spinor& sp : s.data) {
    put<double>(out, sp.up.real());
    put<double>(out, sp.up.imag());
    put<double>(out, sp.down.real());
    put<double>(out, sp.down.imag());
  }
  if (!out) throw Error("failed to write snapshot");
}

Snapshot read_snapshot(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "CQW1", 4) != 0) throw Error("not a CQW1 snapshot");
  const auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw Error("unsupported snapshot version " + format_short(version));
  Snapshot s;
  const auto kind = get<std::uint32_t>(in);
  if (kind > 2) throw Error("unknown lattice kind in snapshot");
  s.kind = static_cast<LatticeKind>(kind);
  s.n1 = get<std::uint32_t>(in);
  s.n2 = get<std::uint32_t>(in);
  s.spinors_per_cell = get<std::uint32_t>(in);
  if (s.spinors_per_cell != 1 && s.spinors_per_cell != 3) throw Error("invalid spinors-per-cell in snapshot");
  s.data.resize(static_cast<std::size_t>(s.n1) * s.n2 * s.spinors_per_cell);
  for (Spinor& sp : s.data) {
    const double ur = get<double>(in), ui = get<double>(in), dr = get<double>(in), di = get<double>(in);
    sp = {cplx(ur, ui), cplx(dr, di)};
  }
  return s;
}

void write_snapshot_file(const std::string& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_snapshot(out, s);
}

Snapshot read_snapshot_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_snapshot(in);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& columns)
    : out_(out), columns_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw ShapeMismatch("CSV row width does not match the header");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  out_ << line << '\n';
}

}  // namespace cqw
