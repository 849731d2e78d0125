// include/rtfdoa/gemm.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_GEMM_H_
#define RTFDOA_GEMM_H_

namespace rtfdoa {

// Row-major GEMM, C[M,N] (+)= op(A)*op(B).  Dispatches between an internal
// register-blocked kernel (fast for the narrow conv-shaped products here) and
// single-threaded BLAS for wide/dense shapes.  Deterministic for fixed shapes.
//
// gemm_nn: A[M,K],    B[K,N]
// gemm_nt: A[M,K],    B[N,K]   (C = A * B^T)
// gemm_tn: A[K,M],    B[K,N]   (C = A^T * B)
void gemm_nn(int M, int N, int K, const float* A, const float* B, float* C,
             bool accumulate);
void gemm_nt(int M, int N, int K, const float* A, const float* B, float* C,
             bool accumulate);
void gemm_tn(int M, int N, int K, const float* A, const float* B, float* C,
             bool accumulate);
void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C,
             bool accumulate);
void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C,
             bool accumulate);
void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C,
             bool accumulate);

}  // namespace rtfdoa

#endif  // RTFDOA_GEMM_H_
