// Times the serial reference kernels against the OpenMP lane, plus an
// STFT/Griffin-Lim pass at the default analysis size.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "btts/kernels.hpp"
#include "btts/rng.hpp"
#include "btts/signal.hpp"

using namespace btts;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    auto g = rng::stream(seed, "bench");
    std::vector<double> v(n);
    for (auto& x : v) x = rng::uniform(g, -1.0, 1.0);
    return v;
}

void report(const char* name, double serial_ms, double par_ms) {
    std::printf("%-28s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx\n", name, serial_ms,
                par_ms, serial_ms / par_ms);
}

}  // namespace

int main() {
    {
        const std::size_t m = 384, k = 384, n = 384;
        const auto a = random_vec(m * k, 1), b = random_vec(k * n, 2);
        std::vector<double> c(m * n);
        const double ts = time_best_of(5, [&] {
            kernels::serial::matmul(a.data(), b.data(), c.data(), m, k, n);
        });
        const double tp = time_best_of(5, [&] {
            kernels::par::matmul(a.data(), b.data(), c.data(), m, k, n);
        });
        report("matmul 384x384x384", ts, tp);
    }
    {
        const std::size_t t = 2048, cin = 64, cout = 64, taps = 8;
        const auto x = random_vec(t * cin, 3), w = random_vec(taps * cin * cout, 4);
        std::vector<double> y(t * cout);
        const double ts = time_best_of(5, [&] {
            kernels::serial::conv1d_same(x.data(), w.data(), y.data(), t, cin, cout, taps);
        });
        const double tp = time_best_of(5, [&] {
            kernels::par::conv1d_same(x.data(), w.data(), y.data(), t, cin, cout, taps);
        });
        report("conv1d 2048x64x64 w8", ts, tp);
    }
    {
        signal::SignalConfig cfg;  // 48 kHz defaults
        signal::AudioBuffer a;
        a.sample_rate = cfg.sample_rate;
        a.samples.resize(cfg.sample_rate * 2);
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            a.samples[i] = 0.4 * std::sin(2.0 * std::numbers::pi * 220.0 * i / cfg.sample_rate) +
                           0.2 * std::sin(2.0 * std::numbers::pi * 440.0 * i / cfg.sample_rate);

#ifdef _OPENMP
        const int max_threads = omp_get_max_threads();
#endif
        auto serial_mode = [&](bool on) {
            kernels::set_force_serial(on);
#ifdef _OPENMP
            omp_set_num_threads(on ? 1 : max_threads);
#endif
        };

        serial_mode(true);
        const double ts = time_best_of(3, [&] { (void)signal::stft(a, cfg); });
        serial_mode(false);
        const double tp = time_best_of(3, [&] { (void)signal::stft(a, cfg); });
        report("stft 2 s @ 48 kHz", ts, tp);

        auto mag = signal::magnitude(signal::stft(a, cfg));
        auto gl_cfg = cfg;
        gl_cfg.griffin_lim_iters = 10;
        serial_mode(true);
        const double gs = time_best_of(1, [&] { (void)signal::griffin_lim(mag, gl_cfg); });
        serial_mode(false);
        const double gp = time_best_of(1, [&] { (void)signal::griffin_lim(mag, gl_cfg); });
        report("griffin-lim 10 iters", gs, gp);
    }
    return 0;
}
