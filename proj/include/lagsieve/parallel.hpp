#pragma once

namespace lagsieve {

/// Worker count for parallel loops: `requested` when positive, otherwise
/// the LAGSIEVE_THREADS environment variable, otherwise the OpenMP default.
/// Always 1 in builds without OpenMP.
int resolve_threads(int requested);

}  // namespace lagsieve
