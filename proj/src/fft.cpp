#include "fft.hpp"

#include <algorithm>
#include <mutex>
#include <numbers>

namespace nlsp::detail {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  buffer_ = fftw_alloc_complex(static_cast<std::size_t>(n));
  forward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
  fftw_free(buffer_);
}

void Fft::forward(std::complex<double>* data) {
  auto* buf = reinterpret_cast<std::complex<double>*>(buffer_);
  std::copy(data, data + n_, buf);
  fftw_execute(forward_);
  std::copy(buf, buf + n_, data);
}

void Fft::backward(std::complex<double>* data) {
  auto* buf = reinterpret_cast<std::complex<double>*>(buffer_);
  std::copy(data, data + n_, buf);
  fftw_execute(backward_);
  std::copy(buf, buf + n_, data);
}

SineTransform::SineTransform(int n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  buffer_ = fftw_alloc_real(static_cast<std::size_t>(n));
  plan_ = fftw_plan_r2r_1d(n, buffer_, buffer_, FFTW_RODFT00, FFTW_ESTIMATE);
}

SineTransform::~SineTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan_);
  fftw_free(buffer_);
}

void SineTransform::apply(double* data) {
  std::copy(data, data + n_, buffer_);
  fftw_execute(plan_);
  std::copy(buffer_, buffer_ + n_, data);
}

std::vector<double> fourier_wavenumbers(const Grid& grid) {
  const int n = grid.size();
  const double scale = 2.0 * std::numbers::pi / grid.extent();
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) k[static_cast<std::size_t>(j)] = scale * (j < n / 2 ? j : j - n);
  return k;
}

}  // namespace nlsp::detail
