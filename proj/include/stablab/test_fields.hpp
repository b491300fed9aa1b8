#pragma once

#include <cstdint>
#include <vector>

#include "stablab/grid.hpp"
#include "stablab/numeric.hpp"

namespace stablab {

/// Σ_t a_t cos(ω_t · x + φ_t): a smooth field with closed-form derivatives.
struct TrigField {
  struct Term {
    double amplitude;
    Vec omega;
    double phase;
  };
  std::vector<Term> terms;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  ScalarFunction function() const;
};

/// Draws `n_terms` modes with integer wave numbers in [0, max_order] per axis
/// (not all zero), scaled to each axis length so periodic axes stay periodic.
TrigField random_trig_field(const MetricChart& chart, Pcg32& rng, int n_terms = 4,
                            int max_order = 2);

/// Smooth bump exp(1 − 1/(1 − t²)) for |t| < 1, else 0.
double bump_profile(double t);

/// Product of 1D bumps over the bounded axes, each covering `fraction` of the
/// axis about its midpoint; identically 1 along periodic and polar axes.
Field interior_bump(const StructuredGrid& grid, double fraction = 0.8);

/// Radial bump in coordinates about `center` (periodic axes wrap).
Field local_bump(const StructuredGrid& grid, const Vec& center, double radius);

}  // namespace stablab
