#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace cyclecast::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Raw kernel entry points. Every ISA provides the full table; the scalar
/// table is the reference the others are tested against.
struct KernelTable {
  // C[m x n] = A[m x k] * B[k x n]  (C += ... when accumulate)
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
                  bool accumulate);
  // C[k x n] += A[m x k]^T * G[m x n]
  void (*gemm_tn_acc)(const double* a, const double* g, double* c, std::size_t m, std::size_t k, std::size_t n);
  // C[m x k] += G[m x n] * B[k x n]^T
  void (*gemm_nt_acc)(const double* g, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);    // y += alpha * x
  void (*mul_acc)(const double* a, const double* b, double* y, std::size_t n);  // y += a * b
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(CYCLECAST_HAVE_AVX2_TU)
const KernelTable& avx2_table();
#endif

bool isa_available(Isa isa);
const KernelTable& table(Isa isa);

/// ISA chosen at first use: AVX2+FMA when the CPU supports it, unless the
/// CYCLECAST_ISA environment variable (`scalar` or `avx2`) says otherwise.
Isa active_isa();
const KernelTable& active();

/// Overrides the active ISA for the rest of the process (tests, benchmarks).
void set_active_isa(Isa isa);

// Span-based front end over the active table.
void gemm(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate = false);
void gemm_tn_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n);
void gemm_nt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t n, std::size_t k);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

}  // namespace cyclecast::kernels
