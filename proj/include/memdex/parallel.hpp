#pragma once

namespace memdex {

enum class Execution { kSerial, kParallel };

// Worker cap from MEMDEX_THREADS (0 or unset = OpenMP default).
int configured_workers();

// Applies configured_workers() to the OpenMP runtime.
void apply_worker_limit();

// Sets the OpenMP worker count for the lifetime of the scope.
class WorkerScope {
 public:
  explicit WorkerScope(int workers);
  ~WorkerScope();
  WorkerScope(const WorkerScope&) = delete;
  WorkerScope& operator=(const WorkerScope&) = delete;

 private:
  int previous_;
};

int max_workers();

}  // namespace memdex
