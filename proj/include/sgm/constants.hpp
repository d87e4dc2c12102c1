#pragma once

// Central tolerance record. Every module and test reads these rather than
// re-declaring its own magic numbers.
namespace sgm::tol {

inline constexpr double symmetry = 1e-12;         // relative, matrix symmetry
inline constexpr double spd_residual = 1e-10;     // relative, factorization solves
inline constexpr double invariant_slack = 1e-9;   // per-iteration inequality slack
inline constexpr double membership = 1e-9;        // set-membership default
inline constexpr double projection_kkt = 1e-8;    // projection inner-solver target
inline constexpr double variational = 1e-7;       // variational-inequality slack

}  // namespace sgm::tol
