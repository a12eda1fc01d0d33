#pragma once

#include <cstddef>
#include <functional>

namespace scoreinv {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items
/// are claimed dynamically; callers that need deterministic results write to
/// per-index slots and reduce afterwards in index order. The first exception
/// thrown by any item is rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

/// Raises glibc's mmap and trim thresholds so the per-step temporaries of
/// training and sampling are reused instead of mapped and unmapped each
/// time. No-op on other C libraries. Call once at program start.
void tune_allocator();

}  // namespace scoreinv
