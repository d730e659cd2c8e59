#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

// FFTW plan creation is not thread-safe; every plan/destroy goes through this.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans use FFTW_ESTIMATE: heuristic (non-measured) planning keeps runs
// bitwise reproducible.

/// In-place complex-to-complex transform owning its buffer.
class ComplexTransform {
 public:
  explicit ComplexTransform(const std::vector<int>& dims) : dims_(dims) {
    size_ = 1;
    for (int d : dims_) size_ *= static_cast<std::size_t>(d);
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fwd_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf_, buf_,
                         FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf_, buf_,
                         FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("fftw c2c plan creation failed");
  }
  ~ComplexTransform() {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  ComplexTransform(const ComplexTransform&) = delete;
  ComplexTransform& operator=(const ComplexTransform&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  std::size_t size() const { return size_; }

  void forward() { fftw_execute(fwd_); }    // unnormalized
  void backward() { fftw_execute(bwd_); }   // unnormalized; caller divides by size()

 private:
  std::vector<int> dims_;
  std::size_t size_ = 0;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

/// Real <-> half-complex transform pair owning both buffers.
class RealTransform {
 public:
  explicit RealTransform(const std::vector<int>& dims) : dims_(dims) {
    real_size_ = 1;
    for (int d : dims_) real_size_ *= static_cast<std::size_t>(d);
    complex_size_ = 1;
    for (std::size_t i = 0; i + 1 < dims_.size(); ++i)
      complex_size_ *= static_cast<std::size_t>(dims_[i]);
    complex_size_ *= static_cast<std::size_t>(dims_.back() / 2 + 1);
    rbuf_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
    cbuf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size_));
    if (!rbuf_ || !cbuf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_r2c(static_cast<int>(dims_.size()), dims_.data(), rbuf_, cbuf_,
                             FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(static_cast<int>(dims_.size()), dims_.data(), cbuf_, rbuf_,
                             FFTW_ESTIMATE);  // destroys cbuf_ contents
    if (!fwd_ || !bwd_) throw std::runtime_error("fftw r2c plan creation failed");
  }
  ~RealTransform() {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(rbuf_);
    fftw_free(cbuf_);
  }
  RealTransform(const RealTransform&) = delete;
  RealTransform& operator=(const RealTransform&) = delete;

  double* real_data() { return rbuf_; }
  std::complex<double>* complex_data() {
    return reinterpret_cast<std::complex<double>*>(cbuf_);
  }
  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }
  std::size_t logical_size() const { return real_size_; }  // normalization factor

  void forward() { fftw_execute(fwd_); }   // real_data -> complex_data, unnormalized
  void backward() { fftw_execute(bwd_); }  // complex_data -> real_data, unnormalized

 private:
  std::vector<int> dims_;
  std::size_t real_size_ = 0, complex_size_ = 0;
  double* rbuf_ = nullptr;
  fftw_complex* cbuf_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

namespace detail {

// Shared cache for the convenience field operations (fft, gradient, ...).
// Hot loops (flow, propagator, Riesz) own their transforms instead.
inline std::mutex& field_op_mutex() {
  static std::mutex m;
  return m;
}

inline ComplexTransform& cached_complex_transform(const GridSpec& g) {
  static std::map<std::pair<int, int>, std::unique_ptr<ComplexTransform>> cache;
  auto key = std::make_pair(g.dim, g.n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<int> dims(static_cast<std::size_t>(g.dim), g.n);
    it = cache.emplace(key, std::make_unique<ComplexTransform>(dims)).first;
  }
  return *it->second;
}

}  // namespace detail

}  // namespace choquard
