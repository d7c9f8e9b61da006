#include "powerfree/parallel.hpp"

#include <cstdio>
#include <string>

namespace powerfree {

void ParallelContext::require_budget(long double iterations, const char* what) const {
  if (iterations > static_cast<long double>(budget_)) {
    char estimate[32];
    std::snprintf(estimate, sizeof estimate, "%.4g", static_cast<double>(iterations));
    throw BudgetExceeded(std::string(what) + ": about " + estimate + " iterations exceed budget " +
                         std::to_string(budget_));
  }
}

void ParallelContext::parallel_for(std::size_t tasks,
                                   const std::function<void(std::size_t)>& task) const {
  if (tasks == 0) return;
  std::vector<std::exception_ptr> errors(tasks);
  auto run_one = [&](std::size_t i) {
    try {
      poll();
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t nthreads = std::min<std::size_t>(workers_, tasks);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t w = 0; w < nthreads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) run_one(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace powerfree
