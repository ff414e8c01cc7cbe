#pragma once

#include <complex>
#include <vector>

namespace storm {

/// Real <-> half-complex FFT of a fixed length, backed by FFTW. Each instance
/// owns its plans and scratch buffers; use one instance per thread. Plan
/// creation is serialized internally (FFTW planner is not thread-safe).
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // out must hold n/2+1 complex values.
  void forward(const double* in, std::complex<double>* out);

  // Unnormalized inverse is divided by n here; out must hold n doubles.
  void inverse(const std::complex<double>* in, double* out);

 private:
  int n_;
  void* plan_fwd_;
  void* plan_inv_;
  double* real_buf_;
  void* cplx_buf_;
};

}  // namespace storm
