#pragma once

namespace botdna {

// Applies BOTDNA_THREADS (a positive integer) as the OpenMP thread cap and
// returns the cap in effect. Unset leaves the OpenMP default. Throws Error
// on a malformed value.
int configure_threads_from_env();

}  // namespace botdna
