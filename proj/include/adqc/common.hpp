#pragma once

// Shared aliases, constants and error helpers for the adqc library.
//
// Unit conventions used throughout: energies and frequencies in GHz, times in
// nanoseconds.  Every evolution operator carries an explicit 2*pi, i.e.
// exp(-i 2*pi H t) with H in GHz and t in ns, so tabulated GHz values can be
// used without hidden radian conversions.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace adqc {

using Index = Eigen::Index;
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi_v<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;
inline constexpr cplx ci{0.0, 1.0};
inline constexpr double inf = std::numeric_limits<double>::infinity();

// Validation failures (bad sizes, malformed inputs).
inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Parameter outside its mathematical domain (e.g. negative time).
inline void require_domain(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

// Parameter outside a configured range (e.g. programmable coupler limits).
inline void require_range(bool ok, const std::string& what) {
  if (!ok) throw std::out_of_range(what);
}

// Numerical-accuracy failure detected at run time (lost Hermiticity, trace
// drift, non-physical output).  Distinct from validation errors so callers
// can map it to a dedicated exit code.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_accuracy(bool ok, const std::string& what) {
  if (!ok) throw numerical_error(what);
}

// Deterministic parallel map: fn(i) for i in [0, n), results committed by
// index so the output is independent of the worker count.  workers == 0
// means "use the hardware concurrency".
inline void parallel_for(Index n, int workers,
                         const std::function<void(Index)>& fn) {
  if (workers == 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  if (workers <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<Index> next{0};
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace adqc
