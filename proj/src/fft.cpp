#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace fbsq::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex plan_mutex;

const PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const std::size_t size = static_cast<std::size_t>(n) * n * n;
  std::vector<std::complex<double>> scratch(size);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  PlanPair p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.forward = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_FORWARD, flags);
  p.backward = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD, flags);
  if (p.forward == nullptr || p.backward == nullptr) {
    throw std::runtime_error("fftw: plan creation failed");
  }
  return cache.emplace(n, p).first->second;
}

void execute(fftw_plan plan, int n, std::span<std::complex<double>> data) {
  if (data.size() != static_cast<std::size_t>(n) * n * n) {
    throw std::invalid_argument("fft3d: buffer size does not match n^3");
  }
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void fft3d_backward(int n, std::span<std::complex<double>> data) {
  execute(plans_for(n).backward, n, data);
}

void fft3d_forward(int n, std::span<std::complex<double>> data) {
  execute(plans_for(n).forward, n, data);
}

}  // namespace fbsq::detail
