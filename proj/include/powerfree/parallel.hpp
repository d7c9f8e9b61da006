#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "powerfree/errors.hpp"

namespace powerfree {

inline constexpr std::uint64_t kDefaultBudget = 1'000'000'000ULL;

/// Execution resources handed to every long-running operation: worker count,
/// iteration budget and a cooperative cancellation flag. Results never depend
/// on the worker count; work is split into a fixed number of tasks whose
/// outputs are merged in task order.
class ParallelContext {
 public:
  ParallelContext() = default;
  explicit ParallelContext(unsigned workers, std::uint64_t budget = kDefaultBudget)
      : workers_(workers == 0 ? 1 : workers), budget_(budget) {}

  unsigned workers() const noexcept { return workers_; }
  std::uint64_t budget() const noexcept { return budget_; }

  /// Same budget and cancellation flag, one worker. For tasks that already
  /// run inside parallel_for.
  ParallelContext serial() const {
    ParallelContext c = *this;
    c.workers_ = 1;
    return c;
  }

  void cancel() const noexcept { cancelled_->store(true, std::memory_order_relaxed); }
  bool cancelled() const noexcept { return cancelled_->load(std::memory_order_relaxed); }
  void poll() const {
    if (cancelled()) throw Cancelled();
  }

  /// Throws BudgetExceeded when `iterations` exceeds the budget.
  void require_budget(long double iterations, const char* what) const;

  /// Runs task(i) for i in [0, tasks). Exceptions from tasks are rethrown
  /// (the lowest-index failure wins so the error is deterministic too).
  void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& task) const;

  /// Runs task(i) and returns the results in task order.
  template <typename T>
  std::vector<T> map(std::size_t tasks, const std::function<T(std::size_t)>& task) const {
    std::vector<T> out(tasks);
    parallel_for(tasks, [&](std::size_t i) { out[i] = task(i); });
    return out;
  }

 private:
  unsigned workers_ = 1;
  std::uint64_t budget_ = kDefaultBudget;
  std::shared_ptr<std::atomic<bool>> cancelled_ = std::make_shared<std::atomic<bool>>(false);
};

}  // namespace powerfree
