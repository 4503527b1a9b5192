#include "sbp/quadrature.hpp"

#include "sbp/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace sbp {

const GaussRule<8>& gauss8() {
  static const GaussRule<8> rule = [] {
    using Boost = boost::math::quadrature::gauss<double, 8>;
    GaussRule<8> r;
    const auto& x = Boost::abscissa();
    const auto& w = Boost::weights();
    // Boost stores the four positive abscissas; mirror them.
    for (std::size_t k = 0; k < 4; ++k) {
      r.x[3 - k] = -x[k];
      r.w[3 - k] = w[k];
      r.x[4 + k] = x[k];
      r.w[4 + k] = w[k];
    }
    return r;
  }();
  return rule;
}

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  std::vector<double> w(nodes.size(), 0.0);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double h = nodes[i + 1] - nodes[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

int worker_count() {
  if (const char* env = std::getenv("SBP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sbp
