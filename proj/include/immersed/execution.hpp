#pragma once

namespace immersed {

/// Selects between the OpenMP kernels and the serial reference path.
///
/// Both paths produce bit-identical results: parallel loops only fill
/// per-item slots, and every reduction is merged serially in item order.
enum class Execution { Serial, Parallel };

}  // namespace immersed
