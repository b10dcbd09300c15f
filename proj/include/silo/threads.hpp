#pragma once

namespace silo {

// Applies the SILO_THREADS environment cap (if set and positive) to the
// OpenMP runtime. Call once at process entry; harmless without OpenMP.
void apply_thread_env();

// Current OpenMP thread budget (1 when built without OpenMP).
int max_threads();

}  // namespace silo
