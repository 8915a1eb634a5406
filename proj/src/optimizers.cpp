#include "batchgap/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "batchgap/simd/kernels.hpp"

namespace batchgap {

std::string_view to_string(OptimizerRule rule) {
  switch (rule) {
    case OptimizerRule::sgd:
      return "sgd";
    case OptimizerRule::adam:
      return "adam";
    case OptimizerRule::signsgd:
      return "signsgd";
    case OptimizerRule::signed_momentum:
      return "signed_momentum";
    case OptimizerRule::adaptive_clip:
      return "adaptive_clip";
    case OptimizerRule::graft:
      return "graft";
  }
  return "unknown";
}

OptimizerRule parse_rule(std::string_view name) {
  for (OptimizerRule r : {OptimizerRule::sgd, OptimizerRule::adam, OptimizerRule::signsgd,
                          OptimizerRule::signed_momentum, OptimizerRule::adaptive_clip,
                          OptimizerRule::graft}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown optimizer rule: " + std::string(name));
}

void OptimizerSpec::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("optimizer lr must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("optimizer beta must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("adam beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("adam beta2 must be in [0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("adam eps must be > 0");
  if (clip && !(*clip > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
  if (rule == OptimizerRule::adaptive_clip && !(clip_fraction > 0.0 && clip_fraction < 1.0)) {
    throw std::invalid_argument("adaptive clip fraction p must be in (0, 1)");
  }
  if (rule == OptimizerRule::graft) {
    if (!direction || !magnitude) {
      throw std::invalid_argument("graft needs both a direction and a magnitude rule");
    }
    direction->validate();
    magnitude->validate();
  }
}

// --- Optimizer base ---------------------------------------------------------

Optimizer::Optimizer(std::size_t dim, double lr, std::optional<double> clip)
    : dim_(dim), lr_(lr), clip_(clip) {
  if (clip_ && !(*clip_ > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
}

ParamVector Optimizer::prepare_gradient(const ParamVector& g) {
  if (g.size() != dim_) throw std::invalid_argument("optimizer step: gradient dimension mismatch");
  report_ = StepReport{};
  report_.grad_norm_pre_clip = norm2(g);
  if (!clip_) {
    report_.grad_norm_post_clip = report_.grad_norm_pre_clip;
    return g;
  }
  ParamVector clipped = global_norm_clip(g, *clip_);
  report_.norm_clipped = !(clipped == g);
  report_.grad_norm_post_clip = report_.norm_clipped ? norm2(clipped) : report_.grad_norm_pre_clip;
  return clipped;
}

// --- SGD with heavy-ball momentum ---------------------------------------------

SgdMomentum::SgdMomentum(std::size_t dim, double lr, double beta, std::optional<double> clip)
    : Optimizer(dim, lr, clip), beta_(beta), m_(dim) {}

ParamVector SgdMomentum::step(const ParamVector& g) {
  const ParamVector gc = prepare_gradient(g);
  simd::active().heavy_ball(beta_, gc.data(), m_.data(), dim());
  return scaled(-lr(), m_);
}

// --- Adam --------------------------------------------------------------------

Adam::Adam(std::size_t dim, double lr, double beta1, double beta2, double eps,
           std::optional<double> clip)
    : Optimizer(dim, lr, clip), beta1_(beta1), beta2_(beta2), eps_(eps), m_(dim), v_(dim) {}

ParamVector Adam::step(const ParamVector& g) {
  const ParamVector gc = prepare_gradient(g);
  ++t_;
  const simd::AdamCoefficients c{beta1_,
                                 beta2_,
                                 1.0 - std::pow(beta1_, static_cast<double>(t_)),
                                 1.0 - std::pow(beta2_, static_cast<double>(t_)),
                                 eps_,
                                 lr()};
  ParamVector delta(dim());
  simd::active().adam_update(c, gc.data(), m_.data(), v_.data(), delta.data(), dim());
  return delta;
}

// --- sign methods -------------------------------------------------------------------

SignSgd::SignSgd(std::size_t dim, double lr, std::optional<double> clip)
    : Optimizer(dim, lr, clip) {}

ParamVector SignSgd::step(const ParamVector& g) {
  ParamVector delta = componentwise_sign(prepare_gradient(g));
  delta *= -lr();
  return delta;
}

SignedMomentum::SignedMomentum(std::size_t dim, double lr, double beta, std::optional<double> clip)
    : Optimizer(dim, lr, clip), beta_(beta), m_(dim) {}

void SignedMomentum::set_momentum(ParamVector m) {
  if (m.size() != dim()) throw std::invalid_argument("set_momentum: dimension mismatch");
  m_ = std::move(m);
}

ParamVector SignedMomentum::step(const ParamVector& g) {
  const ParamVector gc = prepare_gradient(g);
  simd::active().heavy_ball(beta_, gc.data(), m_.data(), dim());
  ParamVector delta = componentwise_sign(m_);
  delta *= -lr();
  return delta;
}

// --- adaptive momentum clipping ------------------------------------------------------

std::size_t quantile_rank(double clip_fraction, std::size_t dim) {
  if (!(clip_fraction > 0.0 && clip_fraction < 1.0)) {
    throw std::invalid_argument("clip fraction must be in (0, 1)");
  }
  if (dim == 0) throw std::invalid_argument("quantile_rank: empty vector");
  // The guard absorbs round-off in (1 - p) * d for exact products such as 0.9 * 10.
  const double raw = (1.0 - clip_fraction) * static_cast<double>(dim);
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(k, 1, dim);
}

double magnitude_quantile(const ParamVector& x, double clip_fraction) {
  const std::size_t k = quantile_rank(clip_fraction, x.size());
  std::vector<double> mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(), [](double v) { return std::fabs(v); });
  auto nth = mags.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(mags.begin(), nth, mags.end());
  return *nth;
}

ParamVector clip_coordinates(const ParamVector& x, double tau) {
  ParamVector out(x.size());
  simd::active().clip_magnitude(x.data(), tau, out.data(), x.size());
  return out;
}

AdaptiveClipSgd::AdaptiveClipSgd(std::size_t dim, double lr, double beta, double clip_fraction,
                                 std::optional<double> clip)
    : Optimizer(dim, lr, clip), beta_(beta), p_(clip_fraction), m_(dim) {
  quantile_rank(p_, std::max<std::size_t>(dim, 1));
}

ParamVector AdaptiveClipSgd::step(const ParamVector& g) {
  const ParamVector gc = prepare_gradient(g);
  simd::active().heavy_ball(beta_, gc.data(), m_.data(), dim());
  tau_ = magnitude_quantile(m_, p_);
  report_.clip_source = m_;
  report_.clip_threshold = tau_;
  ParamVector delta = clip_coordinates(m_, tau_);
  delta *= -lr();
  return delta;
}

// --- grafting ------------------------------------------------------------------

Graft::Graft(std::unique_ptr<Optimizer> direction, std::unique_ptr<Optimizer> magnitude)
    : Optimizer(direction ? direction->dim() : 0, direction ? direction->lr() : 0.0, std::nullopt),
      direction_(std::move(direction)),
      magnitude_(std::move(magnitude)) {
  if (!direction_ || !magnitude_) throw std::invalid_argument("graft needs two optimizers");
  if (direction_->dim() != magnitude_->dim()) {
    throw std::invalid_argument("graft sub-optimizers must share a dimension");
  }
}

void Graft::set_lr(double lr) {
  Optimizer::set_lr(lr);
  direction_->set_lr(lr);
  magnitude_->set_lr(lr);
}

ParamVector Graft::step(const ParamVector& g) {
  last_direction_ = direction_->step(g);
  last_magnitude_ = magnitude_->step(g);
  report_ = direction_->last_report();
  const double dnorm = norm2(last_direction_);
  if (dnorm == 0.0) return ParamVector(dim());
  return scaled(norm2(last_magnitude_) / dnorm, last_direction_);
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t dim) {
  spec.validate();
  switch (spec.rule) {
    case OptimizerRule::sgd:
      return std::make_unique<SgdMomentum>(dim, spec.lr, spec.beta, spec.clip);
    case OptimizerRule::adam:
      return std::make_unique<Adam>(dim, spec.lr, spec.beta1, spec.beta2, spec.eps, spec.clip);
    case OptimizerRule::signsgd:
      return std::make_unique<SignSgd>(dim, spec.lr, spec.clip);
    case OptimizerRule::signed_momentum:
      return std::make_unique<SignedMomentum>(dim, spec.lr, spec.beta, spec.clip);
    case OptimizerRule::adaptive_clip:
      return std::make_unique<AdaptiveClipSgd>(dim, spec.lr, spec.beta, spec.clip_fraction,
                                               spec.clip);
    case OptimizerRule::graft: {
      auto graft = std::make_unique<Graft>(make_optimizer(*spec.direction, dim),
                                           make_optimizer(*spec.magnitude, dim));
      graft->set_lr(spec.lr);
      return graft;
    }
  }
  throw std::invalid_argument("unhandled optimizer rule");
}

}  // namespace batchgap
