#pragma once

// Binary grid snapshots and CSV output.
//
// Snapshot layout (all little-endian): "CQW1", u32 version, u32 lattice kind,
// u32 n1, u32 n2, u32 spinors per cell, then per spinor in storage order
// f64 up.re, up.im, down.re, down.im.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cqw/lattice.hpp"

namespace cqw {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  LatticeKind kind = LatticeKind::honeycomb;
  std::uint32_t n1 = 0;
  std::uint32_t n2 = 0;
  std::uint32_t spinors_per_cell = 1;
  std::vector<Spinor> data;
};

Snapshot to_snapshot(const SpinorField& psi);
Snapshot to_snapshot(const EdgeField& psi);

void write_snapshot(std::ostream& out, const Snapshot& s);
Snapshot read_snapshot(std::istream& in);
void write_snapshot_file(const std::string& path, const Snapshot& s);
Snapshot read_snapshot_file(const std::string& path);

/// Minimal CSV writer: header once, then rows of doubles at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace cqw
