#pragma once

namespace fingermi {

/// Keeps freed tensor buffers in the process heap instead of returning them
/// to the operating system. Training allocates and frees the same large
/// activation buffers every step; with glibc's default thresholds each one is
/// a fresh mmap whose pages fault in again, which costs more system time than
/// the arithmetic. Call once at program start; a no-op on other C libraries.
void tune_allocator();

}  // namespace fingermi
