#include "fbsq/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "fft.hpp"

namespace fbsq {

SpectralField::SpectralField(const Grid& grid, Rank rank)
    : grid_(grid), rank_(rank), data_(grid.size() * static_cast<std::size_t>(rank)) {}

void SpectralField::set_hermitian_mode(const IntVec3& k, int c, Complex value) {
  const std::size_t idx = grid_.flat_of_wavevector(k);
  const std::size_t mir = grid_.mirror(idx);
  if (grid_.is_nyquist(idx)) return;
  if (idx == mir) {
    (*this)(c, idx) = Complex(value.real(), 0.0);
    return;
  }
  (*this)(c, idx) = value;
  (*this)(c, mir) = std::conj(value);
}

double SpectralField::modulus(std::size_t k) const {
  double sum = 0.0;
  for (int c = 0; c < components(); ++c) sum += std::norm((*this)(c, k));
  return std::sqrt(sum);
}

void require_compatible(const SpectralField& a, const SpectralField& b, const char* what) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
  }
  if (a.rank() != b.rank()) {
    throw std::invalid_argument(std::string(what) + ": rank mismatch");
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_compatible(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_compatible(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

SpectralField& SpectralField::operator*=(Complex factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

SpectralField& SpectralField::add_scaled(const SpectralField& other, double factor) {
  require_compatible(*this, other, "add_scaled");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
  return *this;
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool SpectralField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

void SpectralField::zero_nyquist() {
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (!grid_.is_nyquist(k)) continue;
    for (int c = 0; c < components(); ++c) (*this)(c, k) = 0.0;
  }
}

void SpectralField::truncate_dealias() {
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (grid_.retained(k)) continue;
    for (int c = 0; c < components(); ++c) (*this)(c, k) = 0.0;
  }
}

void SpectralField::set_zero() { std::fill(data_.begin(), data_.end(), Complex{}); }

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double factor, SpectralField a) { return a *= factor; }

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  require_compatible(a, b, "max_abs_diff");
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

double hermitian_asymmetry(const SpectralField& f) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      m = std::max(m, std::abs(f(c, g.mirror(k)) - std::conj(f(c, k))));
    }
  }
  return m;
}

namespace {

std::vector<Complex> component_to_physical(const SpectralField& f, int c, bool truncate) {
  const Grid& g = f.grid();
  std::vector<Complex> buf(f.component(c).begin(), f.component(c).end());
  if (truncate) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!g.retained(k)) buf[k] = 0.0;
    }
  }
  detail::fft3d_backward(g.n(), buf);
  return buf;
}

// Forward transform of real samples into `out` component c, normalized.
void physical_to_component(std::vector<Complex>& buf, SpectralField& out, int c) {
  const Grid& g = out.grid();
  detail::fft3d_forward(g.n(), buf);
  const double scale = 1.0 / static_cast<double>(g.size());
  auto dst = out.component(c);
  for (std::size_t k = 0; k < g.size(); ++k) dst[k] = buf[k] * scale;
}

}  // namespace

PhysicalField to_physical(const SpectralField& f) {
  const Grid& g = f.grid();
  PhysicalField out{g, f.components(), std::vector<double>(g.size() * f.components())};
  for (int c = 0; c < f.components(); ++c) {
    auto buf = component_to_physical(f, c, false);
    auto dst = out.component(c);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = buf[i].real();
  }
  return out;
}

SpectralField from_physical(const PhysicalField& f) {
  if (f.components != 1 && f.components != 3) {
    throw std::invalid_argument("from_physical: components must be 1 or 3");
  }
  SpectralField out(f.grid, f.components == 1 ? Rank::scalar : Rank::vector3);
  for (int c = 0; c < f.components; ++c) {
    auto src = f.component(c);
    std::vector<Complex> buf(src.begin(), src.end());
    physical_to_component(buf, out, c);
  }
  out.zero_nyquist();
  return out;
}

SpectralField divergence(const SpectralField& f) {
  if (f.rank() != Rank::vector3) throw std::invalid_argument("divergence: vector field required");
  const Grid& g = f.grid();
  SpectralField out(g, Rank::scalar);
  const Complex I(0.0, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 xi = g.xi(k);
    out(0, k) = I * (xi[0] * f(0, k) + xi[1] * f(1, k) + xi[2] * f(2, k));
  }
  return out;
}

SpectralField gradient(const SpectralField& q) {
  if (q.rank() != Rank::scalar) throw std::invalid_argument("gradient: scalar field required");
  const Grid& g = q.grid();
  SpectralField out(g, Rank::vector3);
  const Complex I(0.0, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 xi = g.xi(k);
    for (int c = 0; c < 3; ++c) out(c, k) = I * xi[c] * q(0, k);
  }
  return out;
}

SpectralField leray_project(const SpectralField& f) {
  if (f.rank() != Rank::vector3) throw std::invalid_argument("leray_project: vector field required");
  const Grid& g = f.grid();
  SpectralField out = f;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 xi = g.xi(k);
    const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (xi2 == 0.0) continue;
    const Complex dot = xi[0] * f(0, k) + xi[1] * f(1, k) + xi[2] * f(2, k);
    for (int c = 0; c < 3; ++c) out(c, k) = f(c, k) - xi[c] * dot / xi2;
  }
  return out;
}

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("dealiased_product: grid mismatch");
  if (!a.is_scalar()) throw std::invalid_argument("dealiased_product: first factor must be scalar");
  const Grid& g = a.grid();
  const auto pa = component_to_physical(a, 0, true);
  SpectralField out(g, b.rank());
  for (int c = 0; c < b.components(); ++c) {
    auto buf = component_to_physical(b, c, true);
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] = pa[i].real() * buf[i].real();
    physical_to_component(buf, out, c);
  }
  out.truncate_dealias();
  return out;
}

namespace {

// Retained modes of one grid with their mirrors and frequencies.
struct RetainedModes {
  std::vector<std::size_t> flat;
  std::vector<std::size_t> mirror;
  std::vector<Vec3> xi;
};

const RetainedModes& retained_modes(const Grid& g) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<RetainedModes>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{g.n(), g.box_scale()}];
  if (!slot) {
    slot = std::make_unique<RetainedModes>();
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!g.retained(k)) continue;
      slot->flat.push_back(k);
      slot->mirror.push_back(g.mirror(k));
      slot->xi.push_back(g.xi(k));
    }
  }
  return *slot;
}

// Physical samples of real fields given by their (Hermitian) coefficient
// arrays, two per complex transform. Only retained modes enter.
std::vector<std::vector<double>> to_physical_packed(const std::vector<const Complex*>& fields,
                                                    const Grid& g, const RetainedModes& modes) {
  std::vector<std::vector<double>> out(fields.size(), std::vector<double>(g.size()));
  std::vector<Complex> buf(g.size());
  const Complex I(0.0, 1.0);
  for (std::size_t f = 0; f < fields.size(); f += 2) {
    const bool pair = f + 1 < fields.size();
    std::fill(buf.begin(), buf.end(), Complex{});
    for (std::size_t m : modes.flat) {
      buf[m] = fields[f][m];
      if (pair) buf[m] += I * fields[f + 1][m];
    }
    detail::fft3d_backward(g.n(), buf);
    for (std::size_t x = 0; x < g.size(); ++x) out[f][x] = buf[x].real();
    if (pair) {
      for (std::size_t x = 0; x < g.size(); ++x) out[f + 1][x] = buf[x].imag();
    }
  }
  return out;
}

}  // namespace

SpectralField nonlinear_tensor(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("nonlinear_tensor: grid mismatch");
  if (b.rank() != Rank::vector3) {
    throw std::invalid_argument("nonlinear_tensor: transporting field must be a vector");
  }
  const Grid& g = a.grid();
  const RetainedModes& modes = retained_modes(g);
  std::vector<const Complex*> inputs;
  for (int k = 0; k < 3; ++k) inputs.push_back(b.component(k).data());
  for (int i = 0; i < a.components(); ++i) inputs.push_back(a.component(i).data());
  const auto phys = to_physical_packed(inputs, g, modes);

  // Products b_k a_i are real, so two of them share one forward transform:
  // F = FFT(P1 + i P2), P1^(k) = (F(k) + conj F(-k))/2, P2^(k) = (F(k) - conj F(-k))/(2i).
  std::vector<std::pair<int, int>> products;  // (i, k)
  for (int i = 0; i < a.components(); ++i)
    for (int k = 0; k < 3; ++k) products.emplace_back(i, k);

  SpectralField out(g, a.rank());
  std::vector<Complex> buf(g.size());
  const double scale = 1.0 / static_cast<double>(g.size());
  const Complex I(0.0, 1.0);
  for (std::size_t p = 0; p < products.size(); p += 2) {
    const bool pair = p + 1 < products.size();
    const auto [i1, k1] = products[p];
    const auto& a1 = phys[3 + i1];
    const auto& b1 = phys[k1];
    if (pair) {
      const auto [i2, k2] = products[p + 1];
      const auto& a2 = phys[3 + i2];
      const auto& b2 = phys[k2];
      for (std::size_t x = 0; x < g.size(); ++x) buf[x] = Complex(b1[x] * a1[x], b2[x] * a2[x]);
    } else {
      for (std::size_t x = 0; x < g.size(); ++x) buf[x] = b1[x] * a1[x];
    }
    detail::fft3d_forward(g.n(), buf);
    for (std::size_t r = 0; r < modes.flat.size(); ++r) {
      const std::size_t m = modes.flat[r];
      const Complex F = buf[m] * scale;
      const Complex Fm = std::conj(buf[modes.mirror[r]]) * scale;
      const Complex P1 = pair ? 0.5 * (F + Fm) : F;
      out(i1, m) += I * modes.xi[r][k1] * P1;
      if (pair) {
        const auto [i2, k2] = products[p + 1];
        const Complex P2 = (F - Fm) / (2.0 * I);
        out(i2, m) += I * modes.xi[r][k2] * P2;
      }
    }
  }
  return out;
}

}  // namespace fbsq
