#include "chanstab/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace chanstab {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RowFFT::RowFFT(int n1, int n2) : n1_(n1), n2_(n2) {
  const int nc = n1 / 2 + 1;
  std::vector<double> in(static_cast<std::size_t>(n1) * n2);
  std::vector<Complex> out(static_cast<std::size_t>(nc) * n2);
  auto* cin = in.data();
  auto* cout = reinterpret_cast<fftw_complex*>(out.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  int n[] = {n1};
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_many_dft_r2c(1, n, n2, cin, nullptr, 1, n1, cout, nullptr, 1, nc,
                                         flags);
  inverse_plan_ = fftw_plan_many_dft_c2r(1, n, n2, cout, nullptr, 1, nc, cin, nullptr, 1, n1,
                                         flags | FFTW_DESTROY_INPUT);
}

RowFFT::~RowFFT() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

RowSpectrum RowFFT::forward(std::span<const double> values) const {
  RowSpectrum spec{n1_, n2_, std::vector<Complex>(static_cast<std::size_t>(n1_ / 2 + 1) * n2_)};
  std::vector<double> in(values.begin(), values.end());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.data(),
                       reinterpret_cast<fftw_complex*>(spec.coeffs.data()));
  return spec;
}

std::vector<double> RowFFT::inverse(const RowSpectrum& spec) const {
  std::vector<Complex> work = spec.coeffs;
  std::vector<double> out(static_cast<std::size_t>(n1_) * n2_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(work.data()), out.data());
  const double scale = 1.0 / n1_;
  for (double& v : out) v *= scale;
  return out;
}

std::shared_ptr<const RowFFT> RowFFT::get(int n1, int n2) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const RowFFT>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{n1, n2}];
  if (!slot) slot = std::make_shared<RowFFT>(n1, n2);
  return slot;
}

}  // namespace chanstab
