#include "ptycho/tv.hpp"

#include <cmath>
#include <stdexcept>

namespace ptycho {
namespace {

// Forward differences; the last column/row of gx/gy stays zero.
void gradient(const RealImage& u, RealImage& gx, RealImage& gy) {
  const Index h = u.rows();
  const Index w = u.cols();
  gx.setZero(h, w);
  gy.setZero(h, w);
  if (w > 1) gx.leftCols(w - 1) = u.rightCols(w - 1) - u.leftCols(w - 1);
  if (h > 1) gy.topRows(h - 1) = u.bottomRows(h - 1) - u.topRows(h - 1);
}

// Negative adjoint of the gradient above.
void divergence(const RealImage& px, const RealImage& py, RealImage& div) {
  const Index h = px.rows();
  const Index w = px.cols();
  div.setZero(h, w);
  if (w > 1) {
    div.leftCols(w - 1) += px.leftCols(w - 1);
    div.rightCols(w - 1) -= px.leftCols(w - 1);
  }
  if (h > 1) {
    div.topRows(h - 1) += py.topRows(h - 1);
    div.bottomRows(h - 1) -= py.topRows(h - 1);
  }
}

// Pixelwise projection of (px, py) onto the unit Euclidean ball.
void project_unit_ball(RealImage& px, RealImage& py) {
  const RealImage norm = (px.square() + py.square()).sqrt().max(1.0);
  px /= norm;
  py /= norm;
}

double relative_change(const RealImage& ax, const RealImage& ay, const RealImage& bx,
                       const RealImage& by) {
  const double delta = std::sqrt((ax - bx).square().sum() + (ay - by).square().sum());
  const double scale = std::sqrt(ax.square().sum() + ay.square().sum());
  return delta / std::max(scale, 1.0);
}

}  // namespace

double tv_value(const RealImage& u) {
  RealImage gx, gy;
  gradient(u, gx, gy);
  return (gx.square() + gy.square()).sqrt().sum();
}

double tv_objective(const RealImage& u, const RealImage& v, double tau) {
  return 0.5 * (u - v).square().sum() + tau * tv_value(u);
}

double tv_weighted_objective(const RealImage& u, const RealImage& v, double tau,
                             const RealImage& weight) {
  return 0.5 * (weight * (u - v)).square().sum() + tau * tv_value(u);
}

RealImage tv_prox(const RealImage& v, double tau, int max_iter, double tol,
                  std::vector<double>* dual_objective_trace) {
  if (tau < 0) throw std::invalid_argument("tv_prox: negative strength");
  if (dual_objective_trace) dual_objective_trace->clear();
  if (tau == 0.0 || v.size() <= 1 || max_iter <= 0) return v;

  const Index h = v.rows();
  const Index w = v.cols();
  RealImage px = RealImage::Zero(h, w);
  RealImage py = RealImage::Zero(h, w);
  RealImage u(h, w), gx(h, w), gy(h, w), div(h, w);
  const double step = 1.0 / (8.0 * tau);

  for (int it = 0; it < max_iter; ++it) {
    divergence(px, py, div);
    u = v + tau * div;
    gradient(u, gx, gy);
    RealImage qx = px + step * gx;
    RealImage qy = py + step * gy;
    project_unit_ball(qx, qy);
    const double rel = relative_change(qx, qy, px, py);
    px.swap(qx);
    py.swap(qy);
    if (dual_objective_trace) {
      divergence(px, py, div);
      dual_objective_trace->push_back(0.5 * (v + tau * div).square().sum());
    }
    if (rel < tol) break;
  }
  divergence(px, py, div);
  return v + tau * div;
}

RealImage tv_prox_weighted(const RealImage& v, double tau, const RealImage& weight, int max_iter,
                           double tol) {
  if (tau < 0) throw std::invalid_argument("tv_prox_weighted: negative strength");
  if (weight.rows() != v.rows() || weight.cols() != v.cols())
    throw std::invalid_argument("tv_prox_weighted: weight shape mismatch");
  if ((weight <= 0.0).any()) throw std::invalid_argument("tv_prox_weighted: nonpositive weight");
  if (tau == 0.0 || v.size() <= 1 || max_iter <= 0) return v;

  const Index h = v.rows();
  const Index w = v.cols();
  const RealImage wsq = weight.square();

  // Chambolle-Pock on min_u max_{|p|<=1} <tau grad u, p> + 0.5||D(u-v)||^2;
  // the u-update is the exact prox of the weighted quadratic.
  const double gain = std::sqrt(0.95 / 8.0) / tau;
  const double sigma = gain;
  const double theta = gain;

  RealImage u = v;
  RealImage ubar = v;
  RealImage px = RealImage::Zero(h, w);
  RealImage py = RealImage::Zero(h, w);
  RealImage gx(h, w), gy(h, w), div(h, w);

  for (int it = 0; it < max_iter; ++it) {
    gradient(ubar, gx, gy);
    RealImage px_new = px + (sigma * tau) * gx;
    RealImage py_new = py + (sigma * tau) * gy;
    project_unit_ball(px_new, py_new);
    const double rel = relative_change(px_new, py_new, px, py);
    px.swap(px_new);
    py.swap(py_new);

    divergence(px, py, div);
    const RealImage u_old = u;
    u = (u_old + (theta * tau) * div + theta * wsq * v) / (1.0 + theta * wsq);
    ubar = 2.0 * u - u_old;
    if (rel < tol) break;
  }
  return u;
}

RealImage nonneg_projection(const RealImage& v) { return v.max(0.0); }

}  // namespace ptycho
