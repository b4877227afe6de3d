#include "sccl/parallel.hpp"

#include <iostream>
#include <mutex>
#include <omp.h>

#include "sccl/errors.hpp"

namespace sccl {

namespace {
std::mutex g_warn_mutex;
WarningSink g_sink;
}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_warn_mutex);
  std::swap(g_sink, sink);
  return sink;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_num_threads(int n) {
  if (n < 1) throw ValidationError("thread count must be >= 1");
  omp_set_num_threads(n);
}

int num_threads() { return omp_get_max_threads(); }

}  // namespace sccl
