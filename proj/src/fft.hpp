#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace pcanet::detail {

/// FFTW's planner is not thread-safe; every plan creation and destruction
/// goes through this lock. Executing an existing plan is safe.
std::mutex& fftw_planner_mutex();

/// Complex transform of fixed size with FFTW_ESTIMATE planning (deterministic).
class ComplexFft {
 public:
  ComplexFft(int n, int sign);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  /// In-place unnormalized transform of data (size n).
  void run(std::vector<std::complex<double>>& data) const;

 private:
  int n_;
  fftw_plan plan_;
};

/// Real-to-complex / complex-to-real pair of size n (n/2+1 complex bins).
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  /// Unnormalized forward transform.
  void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) const;
  /// Inverse transform including the 1/n normalization.
  void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) const;

 private:
  int n_;
  mutable std::vector<double> real_;
  mutable std::vector<std::complex<double>> spec_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

}  // namespace pcanet::detail
