#include "cdflow/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace cdflow {
namespace {

// FFTW plans are created under a lock (the planner is not thread safe) and
// executed with the new-array interface, which is. FFTW_ESTIMATE keeps the
// chosen algorithm, and therefore the output bits, identical between runs.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [size, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.backward);
    }
  }

  PlanPair get(std::size_t size) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(size);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> a(size), b(size);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const int n = static_cast<int>(size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair plans{fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags),
                   fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags)};
    if (!plans.forward || !plans.backward) throw std::runtime_error("fftw planning failed");
    plans_.emplace(size, plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(fftw_plan plan, std::span<const Complex> in, std::span<Complex> out) {
  if (in.size() != out.size()) throw std::invalid_argument("fft size mismatch");
  // fftw_execute_dft does not modify the input of an out-of-place plan.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

std::size_t bin_of(int p, std::size_t size) {
  const auto m = static_cast<long>(size);
  return static_cast<std::size_t>(((p % m) + m) % m);
}

}  // namespace

void fft_forward(std::span<const Complex> in, std::span<Complex> out) {
  if (in.empty()) return;
  if (in.data() == out.data()) {
    std::vector<Complex> copy(in.begin(), in.end());
    execute(cache().get(in.size()).forward, copy, out);
    return;
  }
  execute(cache().get(in.size()).forward, in, out);
}

void fft_backward(std::span<const Complex> in, std::span<Complex> out) {
  if (in.empty()) return;
  if (in.data() == out.data()) {
    std::vector<Complex> copy(in.begin(), in.end());
    execute(cache().get(in.size()).backward, copy, out);
    return;
  }
  execute(cache().get(in.size()).backward, in, out);
}

std::vector<Complex> synthesize(std::span<const Complex> modes, std::size_t grid_size, int order) {
  const int n = static_cast<int>(modes.size() / 2);
  if (grid_size < modes.size()) throw std::invalid_argument("grid too small for spectrum");
  std::vector<Complex> bins(grid_size, Complex{});
  for (int p = -n; p <= n; ++p) {
    Complex factor = 1.0;
    for (int k = 0; k < order; ++k) factor *= Complex(0.0, p);
    bins[bin_of(p, grid_size)] += factor * modes[static_cast<std::size_t>(p + n)];
  }
  std::vector<Complex> out(grid_size);
  fft_backward(bins, out);
  return out;
}

std::vector<Complex> analyze(std::span<const Complex> samples, int n_modes) {
  const std::size_t m = samples.size();
  if (static_cast<std::size_t>(2 * n_modes + 1) > m) throw std::invalid_argument("too few samples");
  std::vector<Complex> bins(m);
  fft_forward(samples, bins);
  std::vector<Complex> modes(static_cast<std::size_t>(2 * n_modes + 1));
  const double scale = 1.0 / static_cast<double>(m);
  for (int p = -n_modes; p <= n_modes; ++p) {
    modes[static_cast<std::size_t>(p + n_modes)] = bins[bin_of(p, m)] * scale;
  }
  return modes;
}

std::vector<double> periodic_derivative(std::span<const double> samples, int order) {
  const std::size_t m = samples.size();
  std::vector<Complex> values(samples.begin(), samples.end());
  std::vector<Complex> bins(m);
  fft_forward(values, bins);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double kj = wavenumber(j, m);
    Complex factor = scale;
    for (int k = 0; k < order; ++k) factor *= Complex(0.0, kj);
    bins[j] *= factor;
  }
  fft_backward(bins, values);
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = values[j].real();
  return out;
}

void suppress_roundoff(std::vector<double>& samples, double relative) {
  const std::size_t m = samples.size();
  std::vector<Complex> values(samples.begin(), samples.end());
  std::vector<Complex> bins(m);
  fft_forward(values, bins);
  double peak = 0.0;
  for (const auto& b : bins) peak = std::max(peak, std::abs(b));
  const double scale = 1.0 / static_cast<double>(m);
  for (auto& b : bins) b = std::abs(b) < relative * peak ? Complex(0.0) : b * scale;
  fft_backward(bins, values);
  for (std::size_t j = 0; j < m; ++j) samples[j] = values[j].real();
}

std::vector<double> periodic_antiderivative(std::span<const double> samples) {
  const std::size_t m = samples.size();
  std::vector<Complex> values(samples.begin(), samples.end());
  std::vector<Complex> bins(m);
  fft_forward(values, bins);
  const double scale = 1.0 / static_cast<double>(m);
  bins[0] = 0.0;
  for (std::size_t j = 1; j < m; ++j) {
    const double kj = wavenumber(j, m);
    bins[j] = kj == 0.0 ? Complex{} : bins[j] * scale / Complex(0.0, kj);
  }
  fft_backward(bins, values);
  std::vector<double> out(m);
  const double origin = values[0].real();
  for (std::size_t j = 0; j < m; ++j) out[j] = values[j].real() - origin;
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace cdflow
