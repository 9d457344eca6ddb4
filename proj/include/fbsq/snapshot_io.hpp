#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "fbsq/mild_solver.hpp"

namespace fbsq {

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Snapshot layout, all little-endian:
///
///     "FBSQ"  u32 version  u32 n  u32 rank  f64 L
///     then per component, per mode in row-major storage order: f64 re, f64 im
void write_snapshot(std::ostream& out, const SpectralField& f);
/// Reads one snapshot; Nyquist modes are zeroed on input.
SpectralField read_snapshot(std::istream& in);

void write_snapshot_file(const std::filesystem::path& path, const SpectralField& f);
SpectralField read_snapshot_file(const std::filesystem::path& path);

/// trajectory.fbsq: for every sample time, the V snapshot followed by the D snapshot.
void write_trajectory_file(const std::filesystem::path& path, const Trajectory& traj);
/// All snapshots of a file in order.
std::vector<SpectralField> read_snapshot_sequence(const std::filesystem::path& path);

}  // namespace fbsq
