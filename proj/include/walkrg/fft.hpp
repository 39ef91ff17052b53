#pragma once

// Thin RAII wrapper over FFTW for the d-dimensional DFTs on the torus.
// All axes have the same length P, so FFTW's row-major convention and our
// coordinate-0-fastest site order give the same flat index.

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "walkrg/lattice.hpp"

namespace walkrg::fft {

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

// sign = FFTW_FORWARD: out_k = Σ_x in_x e^{-2πi k·x/P}
// sign = FFTW_BACKWARD: out_x = Σ_k in_k e^{+2πi k·x/P}
inline std::vector<std::complex<double>> transform(const TorusLattice& t, const std::vector<std::complex<double>>& in,
                                                   int sign) {
  const std::size_t n = t.volume();
  std::unique_ptr<fftw_complex, FftwFree> buf(fftw_alloc_complex(n));
  std::vector<int> dims(static_cast<std::size_t>(t.dim()), static_cast<int>(t.period()));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(t.dim(), dims.data(), buf.get(), buf.get(), sign, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf.get()[i][0] = in[i].real();
    buf.get()[i][1] = in[i].imag();
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {buf.get()[i][0], buf.get()[i][1]};
  return out;
}

}  // namespace detail

inline std::vector<std::complex<double>> forward(const TorusLattice& t, const std::vector<std::complex<double>>& in) {
  return detail::transform(t, in, FFTW_FORWARD);
}

/// Unnormalized inverse transform.
inline std::vector<std::complex<double>> backward(const TorusLattice& t, const std::vector<std::complex<double>>& in) {
  return detail::transform(t, in, FFTW_BACKWARD);
}

/// Kernel row c(x) = V^{-1} Σ_k s_k e^{2πi k·x/P} of a real even spectrum.
inline std::vector<double> kernel_from_spectrum(const TorusLattice& t, const std::vector<double>& spectrum) {
  std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
  auto out = backward(t, in);
  std::vector<double> row(out.size());
  const double inv = 1.0 / static_cast<double>(t.volume());
  for (std::size_t i = 0; i < out.size(); ++i) row[i] = out[i].real() * inv;
  return row;
}

/// Multipliers s_k = Σ_x c(x) e^{-2πi k·x/P} of a real even kernel row.
inline std::vector<double> spectrum_from_kernel(const TorusLattice& t, const std::vector<double>& row) {
  std::vector<std::complex<double>> in(row.begin(), row.end());
  auto out = forward(t, in);
  std::vector<double> s(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) s[i] = out[i].real();
  return s;
}

}  // namespace walkrg::fft
