#include "kdvlab/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace kdvlab::fourier {
namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~PlanPair() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

const PlanPair& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<PlanPair>();
    std::vector<double> real(n);
    std::vector<Complex> spec(n / 2 + 1);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    slot->r2c = fftw_plan_dft_r2c_1d(len, real.data(), cplx, flags);
    slot->c2r = fftw_plan_dft_c2r_1d(len, cplx, real.data(), flags | FFTW_DESTROY_INPUT);
  }
  return *slot;
}

}  // namespace

std::vector<Complex> forward(std::span<const double> values) {
  const std::size_t n = values.size();
  const auto& p = plans_for(n);
  std::vector<double> in(values.begin(), values.end());
  std::vector<Complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(p.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> inverse(std::span<const Complex> spectrum, std::size_t n) {
  const auto& p = plans_for(n);
  std::vector<Complex> in(spectrum.begin(), spectrum.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace kdvlab::fourier
