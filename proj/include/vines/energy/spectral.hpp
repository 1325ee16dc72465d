// Time-frequency diagnostics on uniformly sampled signals.
#pragma once

#include "vines/core/state.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vines::energy {

inline constexpr double kMorletOmega0 = 6.0;

/// Row-major scales x samples matrix.
template <class T>
struct ScaleTimeMatrix {
    std::size_t rows = 0; ///< one per scale
    std::size_t cols = 0; ///< one per sample
    std::vector<T> data;

    [[nodiscard]] T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    [[nodiscard]] const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Returns the common spacing of `tau`; throws std::domain_error if the grid
/// is not uniform to a relative 1e-6 or has fewer than two points.
double uniform_spacing(std::span<const double> tau);

/// Frequency (cycles per unit tau) at which a Morlet wavelet of `scale` peaks.
double morlet_frequency(double scale, double omega0 = kMorletOmega0);
double morlet_scale(double frequency, double omega0 = kMorletOmega0);

/// `count` scales whose peak frequencies are log-spaced from f_max down to f_min.
std::vector<double> morlet_scales(double f_min = 0.01, double f_max = 2.0, std::size_t count = 64,
                                  double omega0 = kMorletOmega0);

/// Continuous wavelet transform with the analytic Morlet wavelet, computed as a
/// zero-padded spectral product. Normalized so that a tone of amplitude A has
/// modulus A on its ridge.
ScaleTimeMatrix<std::complex<double>> cwt_morlet_complex(std::span<const double> tau,
                                                         std::span<const double> signal,
                                                         std::span<const double> scales,
                                                         double omega0 = kMorletOmega0);

ScaleTimeMatrix<double> cwt_morlet(std::span<const double> tau, std::span<const double> signal,
                                   std::span<const double> scales, double omega0 = kMorletOmega0);

enum class Window { none, hann };

struct SpectrumBin {
    double frequency = 0.0; ///< cycles per unit tau
    double magnitude = 0.0;
};

/// One-sided DFT of the windowed signal, scaled so that a sinusoid of
/// amplitude A on an exact bin reads A.
std::vector<std::complex<double>> one_sided_dft(std::span<const double> tau, std::span<const double> signal,
                                                Window window = Window::hann);

std::vector<SpectrumBin> amplitude_spectrum(std::span<const double> tau, std::span<const double> signal,
                                            Window window = Window::hann);

/// Grid samples of a trajectory (impact instants dropped) as parallel arrays.
struct UniformSeries {
    std::vector<double> tau;
    std::vector<double> x1;
    std::vector<double> v1;
    std::vector<double> x2;
    std::vector<double> v2;
    std::vector<double> w; ///< x1 - x2
};

UniformSeries uniform_series(const core::Trajectory& tr);

} // namespace vines::energy
