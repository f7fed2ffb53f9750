#pragma once

#include <fftw3.h>

#include <Eigen/Core>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "petv/error.hpp"

namespace petv {

/// Complex-to-complex DFT of fixed length backed by FFTW.
///
/// Plans are created once per length with FFTW_ESTIMATE | FFTW_UNALIGNED and shared
/// through a process-wide cache. Planning is serialized; execution uses the new-array
/// interface on caller-owned buffers, so one instance may be used from several threads.
class FourierTransform {
 public:
  explicit FourierTransform(int n) : n_(n), plans_(plans_for(n)) {}

  int size() const { return n_; }

  /// Unnormalized forward transform: out_k = sum_j in_j exp(-2 pi i j k / n).
  void forward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(plans_->forward, as_fftw(in), reinterpret_cast<fftw_complex*>(out));
  }

  /// Inverse transform including the 1/n factor.
  void inverse(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(plans_->backward, as_fftw(in), reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / n_;
    for (int j = 0; j < n_; ++j) out[j] *= scale;
  }

  Eigen::VectorXcd forward(const Eigen::VectorXcd& in) const {
    detail::require_size(in.size(), n_, "FourierTransform::forward");
    Eigen::VectorXcd out(n_);
    forward(in.data(), out.data());
    return out;
  }

  Eigen::VectorXcd forward(const Eigen::VectorXd& in) const {
    return forward(Eigen::VectorXcd(in.cast<std::complex<double>>()));
  }

  Eigen::VectorXcd inverse(const Eigen::VectorXcd& in) const {
    detail::require_size(in.size(), n_, "FourierTransform::inverse");
    Eigen::VectorXcd out(n_);
    inverse(in.data(), out.data());
    return out;
  }

 private:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    Plans() = default;
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
    ~Plans() {
      std::lock_guard lock(planner_mutex());
      if (forward) fftw_destroy_plan(forward);
      if (backward) fftw_destroy_plan(backward);
    }
  };

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  static std::shared_ptr<const Plans> plans_for(int n) {
    if (n <= 0) throw ConfigError("FourierTransform: length must be positive");
    // The mutex must outlive the cache: cached plans lock it on destruction at exit.
    std::mutex& mtx = planner_mutex();
    static std::map<int, std::shared_ptr<const Plans>> cache;
    std::lock_guard lock(mtx);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    auto plans = std::make_shared<Plans>();
    std::vector<std::complex<double>> a(n), b(n);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->forward = fftw_plan_dft_1d(n, pa, pb, FFTW_FORWARD, flags);
    plans->backward = fftw_plan_dft_1d(n, pa, pb, FFTW_BACKWARD, flags);
    if (!plans->forward || !plans->backward) throw NumericalError("FFTW planning failed");
    cache.emplace(n, plans);
    return plans;
  }

  // Out-of-place complex transforms preserve their input, so dropping const is safe.
  static fftw_complex* as_fftw(const std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
  }

  int n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace petv
