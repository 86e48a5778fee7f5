#pragma once

namespace dspn {

/// Caps the OpenMP worker count from the DSPN_THREADS environment variable.
/// Returns the resulting thread budget.
int configure_threads_from_env();

void set_thread_count(int threads);
int max_threads();
int thread_index();

}  // namespace dspn
