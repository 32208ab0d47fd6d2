#include "fft.hpp"

#include <algorithm>

namespace pcanet::detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {
fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

ComplexFft::ComplexFft(int n, int sign) : n_(n) {
  std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
  std::lock_guard lock(fftw_planner_mutex());
  plan_ = fftw_plan_dft_1d(n, as_fftw(scratch.data()), as_fftw(scratch.data()), sign, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan_);
}

void ComplexFft::run(std::vector<std::complex<double>>& data) const {
  fftw_execute_dft(plan_, as_fftw(data.data()), as_fftw(data.data()));
}

RealFft::RealFft(int n)
    : n_(n), real_(static_cast<std::size_t>(n)), spec_(static_cast<std::size_t>(n / 2 + 1)) {
  std::lock_guard lock(fftw_planner_mutex());
  forward_ = fftw_plan_dft_r2c_1d(n, real_.data(), as_fftw(spec_.data()), FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(n, as_fftw(spec_.data()), real_.data(), FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(inverse_);
}

void RealFft::forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) const {
  std::copy(in.begin(), in.end(), real_.begin());
  fftw_execute(forward_);
  out.assign(spec_.begin(), spec_.end());
}

void RealFft::inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) const {
  // c2r destroys its input, so always work on the private copy.
  std::copy(in.begin(), in.end(), spec_.begin());
  fftw_execute(inverse_);
  out.resize(static_cast<std::size_t>(n_));
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = real_[static_cast<std::size_t>(i)] * scale;
}

}  // namespace pcanet::detail
