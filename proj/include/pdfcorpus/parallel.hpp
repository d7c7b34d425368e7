#pragma once

namespace pdfcorpus {

/// Caps OpenMP worker threads for every parallel kernel; 0 restores the
/// runtime default (logical cores). Results never depend on this value.
void set_thread_count(int threads);
int thread_count();

}  // namespace pdfcorpus
