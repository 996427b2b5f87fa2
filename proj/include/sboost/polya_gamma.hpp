#pragma once

#include "sboost/rng.hpp"

namespace sboost {

/// Exact PG(1, z) draw by the alternating-series rejection sampler
/// (truncated exponential / truncated inverse-Gaussian proposal mixture).
double sample_pg(double z, Rng& rng);
double sample_pg(double z, SplitMix64& rng);

/// E[PG(1, z)] = tanh(z/2) / (2z), with the z -> 0 limit 1/4.
double pg_mean(double z);

/// Var[PG(1, z)] = (sinh z - z) / (4 z^3 cosh^2(z/2)), with the z -> 0 limit 1/24.
double pg_variance(double z);

} // namespace sboost
