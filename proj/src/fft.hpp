#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

#include "nlsp/grid.hpp"

namespace nlsp::detail {

/// Unnormalised complex DFT pair of fixed length. Plans are created under a
/// global lock; execution is thread-safe per object.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const { return n_; }
  void forward(std::complex<double>* data);
  void backward(std::complex<double>* data);

 private:
  int n_;
  fftw_complex* buffer_;
  fftw_plan forward_;
  fftw_plan backward_;
};

/// Unnormalised DST-I (FFTW RODFT00); applying it twice multiplies by 2(n+1).
class SineTransform {
 public:
  explicit SineTransform(int n);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  void apply(double* data);

 private:
  int n_;
  double* buffer_;
  fftw_plan plan_;
};

/// Angular wavenumbers of the DFT bins for a periodic grid; the Nyquist bin
/// gets -pi n / L.
std::vector<double> fourier_wavenumbers(const Grid& grid);

}  // namespace nlsp::detail
