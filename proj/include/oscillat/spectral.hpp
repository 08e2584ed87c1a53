#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <cstddef>
#include <vector>

namespace oscillat {

using cplx = std::complex<double>;

// Periodic N^d sample grids over one lattice cell. Sample k (multi-index,
// row-major, last axis fastest) sits at fractional coordinates tau = k / N.
// Fourier coefficients use the same layout, with FFT index k <-> frequency
// k for k < N/2 and k - N otherwise.
namespace spectral {

inline std::size_t grid_size(int dim, int N) {
  std::size_t s = 1;
  for (int j = 0; j < dim; ++j) s *= static_cast<std::size_t>(N);
  return s;
}

inline int index_to_freq(int k, int N) { return k < N / 2 ? k : k - N; }
inline int freq_to_index(int nu, int N) { return nu < 0 ? nu + N : nu; }

namespace detail {

inline Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

// Applies a 1D transform along every axis of a row-major N^d array.
template <class Transform>
void along_axes(std::vector<cplx>& data, int dim, int N, Transform&& transform) {
  const std::size_t total = data.size();
  std::vector<cplx> line(N), out(N);
  std::size_t stride = 1;
  for (int axis = dim - 1; axis >= 0; --axis) {
    const std::size_t block = stride * static_cast<std::size_t>(N);
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (int k = 0; k < N; ++k) line[k] = data[base + off + k * stride];
        transform(out, line);
        for (int k = 0; k < N; ++k) data[base + off + k * stride] = out[k];
      }
    }
    stride = block;
  }
}

}  // namespace detail

/// Samples -> Fourier coefficients (normalized so that the mean is c_0).
inline void forward(std::vector<cplx>& data, int dim, int N) {
  auto& fft = detail::engine();
  detail::along_axes(data, dim, N, [&](std::vector<cplx>& out, const std::vector<cplx>& in) {
    fft.fwd(out, in);
  });
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

/// Fourier coefficients -> samples (plain synthesis, no scaling).
inline void inverse(std::vector<cplx>& data, int dim, int N) {
  auto& fft = detail::engine();
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  detail::along_axes(data, dim, N, [&](std::vector<cplx>& out, const std::vector<cplx>& in) {
    fft.inv(out, in);
  });
  fft.ClearFlag(Eigen::FFT<double>::Unscaled);
}

/// Frequency multi-index of a flat coefficient index.
inline void unflatten(std::size_t flat, int dim, int N, int* nu) {
  for (int j = dim - 1; j >= 0; --j) {
    nu[j] = index_to_freq(static_cast<int>(flat % N), N);
    flat /= N;
  }
}

/// Places N-grid coefficients onto an Np-grid (Np > N). With `split_nyquist`
/// the -N/2 coefficient is shared equally between -N/2 and +N/2 so that real
/// samples stay real under interpolation.
inline std::vector<cplx> pad(const std::vector<cplx>& coeffs, int dim, int N, int Np,
                             bool split_nyquist = true) {
  std::vector<cplx> out(grid_size(dim, Np), cplx(0.0));
  int nu[3];
  for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
    if (coeffs[flat] == cplx(0.0)) continue;
    unflatten(flat, dim, N, nu);
    // Expand the (at most 2^dim) targets produced by Nyquist splitting.
    int branches = 1;
    for (int j = 0; j < dim; ++j)
      if (split_nyquist && nu[j] == -N / 2) branches *= 2;
    for (int b = 0; b < branches; ++b) {
      int bit = 0;
      double weight = 1.0;
      std::size_t target = 0;
      for (int j = 0; j < dim; ++j) {
        int f = nu[j];
        if (split_nyquist && nu[j] == -N / 2) {
          if ((b >> bit) & 1) f = N / 2;
          weight *= 0.5;
          ++bit;
        }
        target = target * Np + freq_to_index(f, Np);
      }
      out[target] += weight * coeffs[flat];
    }
  }
  return out;
}

/// Keeps the frequencies [-N/2, N/2) of an Np-grid coefficient array.
inline std::vector<cplx> truncate(const std::vector<cplx>& coeffs, int dim, int Np, int N) {
  std::vector<cplx> out(grid_size(dim, N));
  int nu[3];
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    unflatten(flat, dim, N, nu);
    std::size_t src = 0;
    for (int j = 0; j < dim; ++j) src = src * Np + freq_to_index(nu[j], Np);
    out[flat] = coeffs[src];
  }
  return out;
}

/// Trigonometric interpolation of N-grid samples onto an Np-grid.
inline std::vector<cplx> resample(std::vector<cplx> samples, int dim, int N, int Np) {
  forward(samples, dim, N);
  auto padded = pad(samples, dim, N, Np, true);
  inverse(padded, dim, Np);
  return padded;
}

}  // namespace spectral
}  // namespace oscillat
