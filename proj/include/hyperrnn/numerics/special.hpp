#pragma once

namespace hyperrnn {

/// Bessel function of the first kind, order zero. Throws DomainError for
/// non-finite input.
double bessel_j0(double x);

}  // namespace hyperrnn
