#pragma once

#include <cstddef>
#include <functional>

namespace qus {

/// Worker count used when a caller passes 0: the value set by
/// set_default_threads, else the QUS_THREADS environment variable, else 1.
unsigned default_threads();
void set_default_threads(unsigned n);

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to
/// `threads` workers. Chunks are disjoint, so bodies that write only to their
/// own index range stay deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace qus
