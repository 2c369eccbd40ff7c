#include "btts/kernels.hpp"

#include <atomic>

namespace btts::kernels {

namespace {

// One output row of C = A*B; row stays serial so the parallel lane
// reproduces the serial accumulation order exactly.
inline void matmul_row(const double* a, const double* b, double* c,
                       std::size_t i, std::size_t k, std::size_t n) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
        const double aip = ai[p];
        const double* bp = b + p * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
}

inline void matmul_nt_row(const double* a, const double* b, double* c,
                          std::size_t i, std::size_t k, std::size_t n) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
        const double* bj = b + j * k;
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
        ci[j] = s;
    }
}

inline void matmul_tn_row(const double* a, const double* b, double* c,
                          std::size_t i, std::size_t m, std::size_t k, std::size_t n) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
        const double api = a[p * k + i];
        const double* bp = b + p * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
}

inline void conv_row(const double* x, const double* w, double* y,
                     std::size_t t0, std::size_t t, std::size_t cin, std::size_t cout,
                     std::size_t taps) {
    const std::size_t pad = (taps - 1) / 2;
    double* yt = y + t0 * cout;
    for (std::size_t o = 0; o < cout; ++o) yt[o] = 0.0;
    for (std::size_t tap = 0; tap < taps; ++tap) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t0 + tap) -
                                   static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
        const double* xs = x + src * cin;
        const double* wt = w + tap * cin * cout;
        for (std::size_t i = 0; i < cin; ++i) {
            const double xv = xs[i];
            const double* wo = wt + i * cout;
            for (std::size_t o = 0; o < cout; ++o) yt[o] += xv * wo[o];
        }
    }
}

inline void conv_grad_input_row(const double* dy, const double* w, double* dx,
                                std::size_t s, std::size_t t, std::size_t cin,
                                std::size_t cout, std::size_t taps) {
    const std::size_t pad = (taps - 1) / 2;
    double* dxs = dx + s * cin;
    for (std::size_t i = 0; i < cin; ++i) dxs[i] = 0.0;
    for (std::size_t tap = 0; tap < taps; ++tap) {
        // y[t0] consumed x[t0 + tap - pad]; invert for x[s].
        const std::ptrdiff_t t0 = static_cast<std::ptrdiff_t>(s + pad) -
                                  static_cast<std::ptrdiff_t>(tap);
        if (t0 < 0 || t0 >= static_cast<std::ptrdiff_t>(t)) continue;
        const double* dyt = dy + t0 * cout;
        const double* wt = w + tap * cin * cout;
        for (std::size_t i = 0; i < cin; ++i) {
            const double* wo = wt + i * cout;
            double s2 = 0.0;
            for (std::size_t o = 0; o < cout; ++o) s2 += dyt[o] * wo[o];
            dxs[i] += s2;
        }
    }
}

inline void conv_grad_weight_cell(const double* x, const double* dy, double* dw,
                                  std::size_t tap, std::size_t i, std::size_t t,
                                  std::size_t cin, std::size_t cout, std::size_t taps) {
    const std::size_t pad = (taps - 1) / 2;
    double* dwo = dw + (tap * cin + i) * cout;
    for (std::size_t t0 = 0; t0 < t; ++t0) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t0 + tap) -
                                   static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
        const double xv = x[src * cin + i];
        const double* dyt = dy + t0 * cout;
        for (std::size_t o = 0; o < cout; ++o) dwo[o] += xv * dyt[o];
    }
}

std::atomic<bool> g_force_serial{false};

}  // namespace

namespace serial {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n);
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_nt_row(a, b, c, i, k, n);
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < k; ++i) matmul_tn_row(a, b, c, i, m, k, n);
}

void conv1d_same(const double* x, const double* w, double* y,
                 std::size_t t, std::size_t cin, std::size_t cout, std::size_t taps) {
    for (std::size_t t0 = 0; t0 < t; ++t0) conv_row(x, w, y, t0, t, cin, cout, taps);
}

void conv1d_same_grad_input(const double* dy, const double* w, double* dx,
                            std::size_t t, std::size_t cin, std::size_t cout,
                            std::size_t taps) {
    for (std::size_t s = 0; s < t; ++s)
        conv_grad_input_row(dy, w, dx, s, t, cin, cout, taps);
}

void conv1d_same_grad_weight(const double* x, const double* dy, double* dw,
                             std::size_t t, std::size_t cin, std::size_t cout,
                             std::size_t taps) {
    for (std::size_t tap = 0; tap < taps; ++tap)
        for (std::size_t i = 0; i < cin; ++i)
            conv_grad_weight_cell(x, dy, dw, tap, i, t, cin, cout, taps);
}

}  // namespace serial

namespace par {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
        matmul_row(a, b, c, static_cast<std::size_t>(i), k, n);
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
        matmul_nt_row(a, b, c, static_cast<std::size_t>(i), k, n);
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(k); ++i)
        matmul_tn_row(a, b, c, static_cast<std::size_t>(i), m, k, n);
}

void conv1d_same(const double* x, const double* w, double* y,
                 std::size_t t, std::size_t cin, std::size_t cout, std::size_t taps) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t0 = 0; t0 < static_cast<std::ptrdiff_t>(t); ++t0)
        conv_row(x, w, y, static_cast<std::size_t>(t0), t, cin, cout, taps);
}

void conv1d_same_grad_input(const double* dy, const double* w, double* dx,
                            std::size_t t, std::size_t cin, std::size_t cout,
                            std::size_t taps) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(t); ++s)
        conv_grad_input_row(dy, w, dx, static_cast<std::size_t>(s), t, cin, cout, taps);
}

void conv1d_same_grad_weight(const double* x, const double* dy, double* dw,
                             std::size_t t, std::size_t cin, std::size_t cout,
                             std::size_t taps) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t tap = 0; tap < static_cast<std::ptrdiff_t>(taps); ++tap)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cin); ++i)
            conv_grad_weight_cell(x, dy, dw, static_cast<std::size_t>(tap),
                                  static_cast<std::size_t>(i), t, cin, cout, taps);
}

}  // namespace par

namespace {
constexpr std::size_t kParallelWork = 32768;
}

void set_force_serial(bool v) { g_force_serial.store(v); }
bool force_serial() { return g_force_serial.load(); }

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    if (!force_serial() && m * k * n >= kParallelWork)
        par::matmul(a, b, c, m, k, n);
    else
        serial::matmul(a, b, c, m, k, n);
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    if (!force_serial() && m * k * n >= kParallelWork)
        par::matmul_nt(a, b, c, m, k, n);
    else
        serial::matmul_nt(a, b, c, m, k, n);
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    if (!force_serial() && m * k * n >= kParallelWork)
        par::matmul_tn(a, b, c, m, k, n);
    else
        serial::matmul_tn(a, b, c, m, k, n);
}

void conv1d_same(const double* x, const double* w, double* y,
                 std::size_t t, std::size_t cin, std::size_t cout, std::size_t taps) {
    if (!force_serial() && t * cin * cout * taps >= kParallelWork)
        par::conv1d_same(x, w, y, t, cin, cout, taps);
    else
        serial::conv1d_same(x, w, y, t, cin, cout, taps);
}

void conv1d_same_grad_input(const double* dy, const double* w, double* dx,
                            std::size_t t, std::size_t cin, std::size_t cout,
                            std::size_t taps) {
    if (!force_serial() && t * cin * cout * taps >= kParallelWork)
        par::conv1d_same_grad_input(dy, w, dx, t, cin, cout, taps);
    else
        serial::conv1d_same_grad_input(dy, w, dx, t, cin, cout, taps);
}

void conv1d_same_grad_weight(const double* x, const double* dy, double* dw,
                             std::size_t t, std::size_t cin, std::size_t cout,
                             std::size_t taps) {
    if (!force_serial() && t * cin * cout * taps >= kParallelWork)
        par::conv1d_same_grad_weight(x, dy, dw, t, cin, cout, taps);
    else
        serial::conv1d_same_grad_weight(x, dy, dw, t, cin, cout, taps);
}

}  // namespace btts::kernels
