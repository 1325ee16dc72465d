#include "vines/energy/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace vines::energy {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> allocate(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) {
        throw std::bad_alloc();
    }
    return FftwBuffer<T>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {
        if (plan_ == nullptr) {
            throw std::runtime_error("FFTW planning failed");
        }
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

void check_lengths(std::span<const double> tau, std::span<const double> signal) {
    if (tau.size() != signal.size()) {
        throw std::domain_error("time grid and signal lengths differ");
    }
}

} // namespace

double uniform_spacing(std::span<const double> tau) {
    if (tau.size() < 2) {
        throw std::domain_error("at least two samples are required");
    }
    const double dt = (tau.back() - tau.front()) / static_cast<double>(tau.size() - 1);
    if (!(dt > 0.0)) {
        throw std::domain_error("time grid must be increasing");
    }
    for (std::size_t i = 1; i < tau.size(); ++i) {
        if (std::abs((tau[i] - tau[i - 1]) - dt) > 1e-6 * dt) {
            throw std::domain_error("time grid is not uniform");
        }
    }
    return dt;
}

double morlet_frequency(double scale, double omega0) { return omega0 / (2.0 * std::numbers::pi * scale); }

double morlet_scale(double frequency, double omega0) { return omega0 / (2.0 * std::numbers::pi * frequency); }

std::vector<double> morlet_scales(double f_min, double f_max, std::size_t count, double omega0) {
    if (!(f_min > 0.0) || !(f_max > f_min) || count < 2) {
        throw std::domain_error("need 0 < f_min < f_max and at least two scales");
    }
    std::vector<double> scales(count);
    const double ratio = std::log(f_min / f_max) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        scales[i] = morlet_scale(f_max * std::exp(ratio * static_cast<double>(i)), omega0);
    }
    return scales;
}

ScaleTimeMatrix<std::complex<double>> cwt_morlet_complex(std::span<const double> tau,
                                                         std::span<const double> signal,
                                                         std::span<const double> scales, double omega0) {
    check_lengths(tau, signal);
    const double dt = uniform_spacing(tau);
    for (const double s : scales) {
        if (!(s > 0.0)) {
            throw std::domain_error("wavelet scales must be positive");
        }
    }

    const std::size_t n = signal.size();
    const std::size_t padded = next_pow2(2 * n);
    auto time = allocate<fftw_complex>(padded);
    auto freq = allocate<fftw_complex>(padded);
    auto work = allocate<fftw_complex>(padded);
    auto out = allocate<fftw_complex>(padded);

    std::unique_ptr<Plan> forward;
    std::unique_ptr<Plan> inverse;
    {
        std::lock_guard lock(planner_mutex());
        forward = std::make_unique<Plan>(
            fftw_plan_dft_1d(static_cast<int>(padded), time.get(), freq.get(), FFTW_FORWARD, FFTW_ESTIMATE));
        inverse = std::make_unique<Plan>(
            fftw_plan_dft_1d(static_cast<int>(padded), work.get(), out.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    }

    for (std::size_t i = 0; i < padded; ++i) {
        time[i][0] = i < n ? signal[i] : 0.0;
        time[i][1] = 0.0;
    }
    forward->execute();

    ScaleTimeMatrix<std::complex<double>> result{scales.size(), n, {}};
    result.data.resize(scales.size() * n);
    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(padded) * dt);
    for (std::size_t r = 0; r < scales.size(); ++r) {
        for (std::size_t k = 0; k < padded; ++k) {
            // Analytic wavelet: positive frequencies only.
            double gain = 0.0;
            if (k > 0 && k < padded / 2) {
                const double arg = scales[r] * d_omega * static_cast<double>(k) - omega0;
                gain = 2.0 * std::exp(-0.5 * arg * arg);
            }
            work[k][0] = freq[k][0] * gain;
            work[k][1] = freq[k][1] * gain;
        }
        inverse->execute();
        for (std::size_t c = 0; c < n; ++c) {
            result(r, c) = {out[c][0] / static_cast<double>(padded), out[c][1] / static_cast<double>(padded)};
        }
    }
    return result;
}

ScaleTimeMatrix<double> cwt_morlet(std::span<const double> tau, std::span<const double> signal,
                                   std::span<const double> scales, double omega0) {
    const auto coeffs = cwt_morlet_complex(tau, signal, scales, omega0);
    ScaleTimeMatrix<double> mod{coeffs.rows, coeffs.cols, {}};
    mod.data.reserve(coeffs.data.size());
    for (const auto& c : coeffs.data) {
        mod.data.push_back(std::abs(c));
    }
    return mod;
}

std::vector<std::complex<double>> one_sided_dft(std::span<const double> tau, std::span<const double> signal,
                                                Window window) {
    check_lengths(tau, signal);
    uniform_spacing(tau);
    const std::size_t n = signal.size();
    auto in = allocate<double>(n);
    auto out = allocate<fftw_complex>(n / 2 + 1);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (window == Window::hann) {
            w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        }
        in[i] = w * signal[i];
        weight_sum += w;
    }
    plan->execute();

    std::vector<std::complex<double>> bins(n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        const double scale = (edge ? 1.0 : 2.0) / weight_sum;
        bins[k] = {out[k][0] * scale, out[k][1] * scale};
    }
    return bins;
}

std::vector<SpectrumBin> amplitude_spectrum(std::span<const double> tau, std::span<const double> signal,
                                            Window window) {
    const auto bins = one_sided_dft(tau, signal, window);
    const double dt = uniform_spacing(tau);
    const double df = 1.0 / (static_cast<double>(signal.size()) * dt);
    std::vector<SpectrumBin> out(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        out[k] = {df * static_cast<double>(k), std::abs(bins[k])};
    }
    return out;
}

UniformSeries uniform_series(const core::Trajectory& tr) {
    UniformSeries s;
    for (const auto& sample : tr.samples) {
        if (sample.kind != core::SampleKind::grid) {
            continue;
        }
        const auto& st = sample.state;
        s.tau.push_back(st.tau);
        s.x1.push_back(st.x1);
        s.v1.push_back(st.v1);
        s.x2.push_back(st.x2);
        s.v2.push_back(st.v2);
        s.w.push_back(st.x1 - st.x2);
    }
    // The closing sample sits at t_end, which need not fall on the grid.
    if (s.tau.size() >= 3) {
        const std::size_t n = s.tau.size();
        const double dt = s.tau[1] - s.tau[0];
        if (std::abs((s.tau[n - 1] - s.tau[n - 2]) - dt) > 1e-6 * dt) {
            for (auto* v : {&s.tau, &s.x1, &s.v1, &s.x2, &s.v2, &s.w}) {
                v->pop_back();
            }
        }
    }
    return s;
}

} // namespace vines::energy
