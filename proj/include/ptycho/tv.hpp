#pragma once

#include <vector>

#include "ptycho/types.hpp"

namespace ptycho {

/// Isotropic discrete total variation with forward differences and reflexive
/// boundary (zero difference past the last row/column).
double tv_value(const RealImage& u);

/// Objective of the TV proximal problem: 0.5 ||u - v||^2 + tau TV(u).
double tv_objective(const RealImage& u, const RealImage& v, double tau);

/// Weighted variant: 0.5 || D (u - v) ||^2 + tau TV(u), D pixelwise.
double tv_weighted_objective(const RealImage& u, const RealImage& v, double tau,
                             const RealImage& weight);

/// Approximate prox of tau*TV at v via projected gradient on the dual with
/// step 1/8.  Stops when the relative dual-variable change drops below tol or
/// after max_iter steps.  When dual_objective_trace is given, the descent
/// objective of the dual iteration, 0.5 ||v + tau div p||^2, is recorded
/// after every inner step; it decreases monotonically at this step size,
/// whereas the primal objective of the iterates is only convergent.
RealImage tv_prox(const RealImage& v, double tau, int max_iter = 50, double tol = 1e-5,
                  std::vector<double>* dual_objective_trace = nullptr);

/// Prox of the spatially weighted problem 0.5||D(u - v)||^2 + tau TV(u),
/// solved in primal-dual form with the weight folded into the data term and
/// warm start at v.  With constant D = d it agrees with
/// tv_prox(v, tau / d^2) up to the solver tolerance.
RealImage tv_prox_weighted(const RealImage& v, double tau, const RealImage& weight,
                           int max_iter = 50, double tol = 1e-5);

/// Pixelwise max(v, 0); the prox of the nonnegativity indicator.
RealImage nonneg_projection(const RealImage& v);

}  // namespace ptycho
