#pragma once

namespace silo {

// Error function, rational-approximation implementation (Cody's near-minimax
// coefficients), absolute error well under 1e-12 everywhere. Total function.
double erf(double x);

// Complement, accurate in the tail (no 1 - erf cancellation).
double erfc(double x);

// Inverse error function on (-1, 1): rational initial guess refined by
// Newton iterations on erf. Throws std::domain_error for |y| >= 1; callers
// that need the tau -> 1 limit handle it analytically on their side.
double erfinv(double y);

}  // namespace silo
