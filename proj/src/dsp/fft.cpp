#include "learnafe/dsp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace learnafe::dsp {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
struct PlanCache {
  std::mutex mu;
  std::map<std::size_t, fftw_plan> forward;
  std::map<std::size_t, fftw_plan> inverse;

  ~PlanCache() {
    for (auto& [n, p] : forward) fftw_destroy_plan(p);
    for (auto& [n, p] : inverse) fftw_destroy_plan(p);
  }

  fftw_plan get(std::size_t n, bool fwd) {
    std::lock_guard lock(mu);
    auto& table = fwd ? forward : inverse;
    if (auto it = table.find(n); it != table.end()) return it->second;
    std::vector<double> re(n);
    std::vector<std::complex<double>> cx(n / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(cx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = fwd ? fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), c, flags)
                      : fftw_plan_dft_c2r_1d(static_cast<int>(n), c, re.data(), flags);
    if (!p) throw std::runtime_error("FFTW planning failed");
    table.emplace(n, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t n = in.size();
  if (n == 0 || out.size() != n / 2 + 1) throw std::invalid_argument("rfft: bad sizes");
  fftw_plan p = cache().get(n, true);
  // r2c does not modify its input, but the API is not const-qualified.
  fftw_execute_dft_r2c(p, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0 || in.size() != n / 2 + 1) throw std::invalid_argument("irfft: bad sizes");
  fftw_plan p = cache().get(n, false);
  // c2r destroys its input
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
}

}  // namespace learnafe::dsp
