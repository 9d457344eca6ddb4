#include "fbsq/snapshot_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace fbsq {
namespace {

constexpr char kMagic[4] = {'F', 'B', 'S', 'Q'};

template <class U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw SnapshotError("snapshot: truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& out, double x) { put_le(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

void write_snapshot(std::ostream& out, const SpectralField& f) {
  const Grid& g = f.grid();
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kSnapshotVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.components()));
  put_f64(out, g.box_scale());
  for (const Complex& c : f.data()) {
    put_f64(out, c.real());
    put_f64(out, c.imag());
  }
  if (!out) throw SnapshotError("snapshot: write failed");
}

SpectralField read_snapshot(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw SnapshotError("snapshot: truncated header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw SnapshotError("snapshot: bad magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSnapshotVersion) {
    throw SnapshotError("snapshot: unsupported version " + std::to_string(version));
  }
  const auto n = get_le<std::uint32_t>(in);
  const auto rank = get_le<std::uint32_t>(in);
  const double L = get_f64(in);
  if (rank != 1 && rank != 3) throw SnapshotError("snapshot: rank must be 1 or 3");
  if (n > 1024) throw SnapshotError("snapshot: implausible n " + std::to_string(n));
  Grid grid = [&] {
    try {
      return make_grid(static_cast<int>(n), L);
    } catch (const std::invalid_argument& e) {
      throw SnapshotError(std::string("snapshot: ") + e.what());
    }
  }();
  SpectralField f(grid, rank == 1 ? Rank::scalar : Rank::vector3);
  for (Complex& c : f.data()) {
    const double re = get_f64(in);
    const double im = get_f64(in);
    c = {re, im};
  }
  if (!f.all_finite()) throw SnapshotError("snapshot: non-finite coefficient");
  f.zero_nyquist();
  return f;
}

void write_snapshot_file(const std::filesystem::path& path, const SpectralField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot write " + path.string());
  write_snapshot(out, f);
}

SpectralField read_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  return read_snapshot(in);
}

void write_trajectory_file(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot write " + path.string());
  for (std::size_t m = 0; m < traj.size(); ++m) {
    write_snapshot(out, traj.V[m]);
    write_snapshot(out, traj.D[m]);
  }
}

std::vector<SpectralField> read_snapshot_sequence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  std::vector<SpectralField> out;
  while (in.peek() != std::char_traits<char>::eof()) out.push_back(read_snapshot(in));
  return out;
}

}  // namespace fbsq
