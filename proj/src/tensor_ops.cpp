#include "gprseg/tensor.hpp"

#include <cblas.h>

#include <mutex>

namespace gprseg::detail {

namespace {

// The training loop is a single consumer thread; spawning BLAS worker
// threads on this workload only adds scheduling overhead.
void pin_blas_threads() {
    static std::once_flag flag;
    std::call_once(flag, [] { openblas_set_num_threads(1); });
}

CBLAS_TRANSPOSE to_cblas(bool trans) { return trans ? CblasTrans : CblasNoTrans; }

}  // namespace

void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta, float* c,
          int ldc) {
    pin_blas_threads();
    cblas_sgemm(CblasRowMajor, to_cblas(trans_a), to_cblas(trans_b), m, n, k, alpha,
                a, lda, b, ldb, beta, c, ldc);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, int lda, const double* b, int ldb, double beta,
          double* c, int ldc) {
    pin_blas_threads();
    cblas_dgemm(CblasRowMajor, to_cblas(trans_a), to_cblas(trans_b), m, n, k, alpha,
                a, lda, b, ldb, beta, c, ldc);
}

}  // namespace gprseg::detail
