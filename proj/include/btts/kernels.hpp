#pragma once

#include <cstddef>

// Dense math kernels shared by the signal and model code. Each kernel has
// a serial reference implementation and an OpenMP one; the unqualified
// entry points dispatch on problem size. The parallel variants split work
// only across disjoint output rows and keep the inner accumulation order
// identical to the serial code, so results are bit-equal for any thread
// count. tests/test_kernels.cpp checks that equality, tools/bench.cpp
// times the two lanes against each other.

namespace btts::kernels {

namespace serial {

// C[M,N] = A[M,K] * B[K,N]
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
// C[M,N] = A[M,K] * B[N,K]^T
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
// C[K,N] = A[M,K]^T * B[M,N]
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// y[T,Cout] = same-padded 1-D convolution of x[T,Cin] with w[taps,Cin,Cout].
// Padding follows the usual "same" rule: pad_left = (taps-1)/2.
void conv1d_same(const double* x, const double* w, double* y,
                 std::size_t t, std::size_t cin, std::size_t cout, std::size_t taps);
// dx[T,Cin] from dy[T,Cout]
void conv1d_same_grad_input(const double* dy, const double* w, double* dx,
                            std::size_t t, std::size_t cin, std::size_t cout,
                            std::size_t taps);
// dw[taps,Cin,Cout] from x[T,Cin], dy[T,Cout] (accumulates into dw)
void conv1d_same_grad_weight(const double* x, const double* dy, double* dw,
                             std::size_t t, std::size_t cin, std::size_t cout,
                             std::size_t taps);

}  // namespace serial

namespace par {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void conv1d_same(const double* x, const double* w, double* y,
                 std::size_t t, std::size_t cin, std::size_t cout, std::size_t taps);
void conv1d_same_grad_input(const double* dy, const double* w, double* dx,
                            std::size_t t, std::size_t cin, std::size_t cout,
                            std::size_t taps);
void conv1d_same_grad_weight(const double* x, const double* dy, double* dw,
                             std::size_t t, std::size_t cin, std::size_t cout,
                             std::size_t taps);

}  // namespace par

// Size-dispatched entry points (parallel above ~32k multiply-adds).
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void conv1d_same(const double* x, const double* w, double* y,
                 std::size_t t, std::size_t cin, std::size_t cout, std::size_t taps);
void conv1d_same_grad_input(const double* dy, const double* w, double* dx,
                            std::size_t t, std::size_t cin, std::size_t cout,
                            std::size_t taps);
void conv1d_same_grad_weight(const double* x, const double* dy, double* dw,
                             std::size_t t, std::size_t cin, std::size_t cout,
                             std::size_t taps);

// Force the dispatchers onto the serial lane (used by the benchmark).
void set_force_serial(bool v);
bool force_serial();

}  // namespace btts::kernels
