#pragma once

namespace dsakit {

// Worker count for a parallel kernel. requested <= 0 means "all available".
// The SADL_DSA_THREADS environment variable, when set to a positive integer,
// caps the result.
int resolve_threads(int requested = 0);

}  // namespace dsakit
