#include <atomic>
#include <cstdlib>
#include <string>

#include "cyclecast/error.hpp"
#include "cyclecast/kernels.hpp"

namespace cyclecast::kernels {

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(CYCLECAST_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
#if defined(CYCLECAST_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) {
    if (!isa_available(Isa::Avx2)) fail(ErrorKind::InvalidConfig, "AVX2 kernels not supported on this CPU");
    return avx2_table();
  }
#else
  if (isa == Isa::Avx2) fail(ErrorKind::InvalidConfig, "AVX2 kernels not built");
#endif
  return scalar_table();
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("CYCLECAST_ISA")) {
    std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Isa> g_isa{Isa::Scalar};

}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    Isa isa = detect();
    g_isa.store(isa);
    t = &table(isa);
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

Isa active_isa() {
  active();
  return g_isa.load();
}

void set_active_isa(Isa isa) {
  const KernelTable* t = &table(isa);
  g_isa.store(isa);
  g_active.store(t, std::memory_order_release);
}

void gemm(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate) {
  if (a.size() != m * k || b.size() != k * n || c.size() != m * n) fail(ErrorKind::ShapeMismatch, "gemm");
  active().gemm_nn(a.data(), b.data(), c.data(), m, k, n, accumulate);
}

void gemm_tn_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n) {
  if (a.size() != m * k || g.size() != m * n || c.size() != k * n) fail(ErrorKind::ShapeMismatch, "gemm_tn");
  active().gemm_tn_acc(a.data(), g.data(), c.data(), m, k, n);
}

void gemm_nt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t n, std::size_t k) {
  if (g.size() != m * n || b.size() != k * n || c.size() != m * k) fail(ErrorKind::ShapeMismatch, "gemm_nt");
  active().gemm_nt_acc(g.data(), b.data(), c.data(), m, n, k);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) fail(ErrorKind::ShapeMismatch, "axpy");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> y) {
  if (a.size() != b.size() || a.size() != y.size()) fail(ErrorKind::ShapeMismatch, "mul_acc");
  active().mul_acc(a.data(), b.data(), y.data(), a.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::ShapeMismatch, "dot");
  return active().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace cyclecast::kernels
