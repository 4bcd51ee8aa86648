#pragma once

// Generators for the model families used in tests and by `kbpsynth gen`.

#include <string>

namespace kbp::corpus {

/// Muddy children with n >= 2 children Child0..Child{n-1} and n rounds.
/// The default variant observes per-child `info` bits that first carry
/// muddiness and then the latest answer (meant for perfect recall); the
/// clock variant observes the others' muddiness and all latest answers.
std::string muddy(int n, bool clock_variant = false);

/// Leader election on a ring A1..An (n >= 2) with crash failures, running
/// `steps` >= 1 rounds of the presumed-leader protocol.
std::string election(int n, int steps);

}  // namespace kbp::corpus
