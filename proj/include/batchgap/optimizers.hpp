#pragma once
// Update rules. Every stepper consumes a raw stochastic gradient and returns
// the update delta; the caller applies w <- w + delta. When a clip threshold
// is configured, the raw gradient is norm-clipped before it touches any
// buffer.

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

#include "batchgap/core/param_vector.hpp"

namespace batchgap {

enum class OptimizerRule { sgd, adam, signsgd, signed_momentum, adaptive_clip, graft };

std::string_view to_string(OptimizerRule rule);
OptimizerRule parse_rule(std::string_view name);

struct OptimizerSpec {
  OptimizerRule rule = OptimizerRule::sgd;
  double lr = 0.1;
  // Heavy-ball momentum for sgd, signed_momentum and adaptive_clip.
  double beta = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  std::optional<double> clip;   // global norm threshold on the raw gradient
  double clip_fraction = 0.1;   // p, adaptive_clip only
  // graft only: update direction from one rule, global magnitude from another.
  std::shared_ptr<const OptimizerSpec> direction;
  std::shared_ptr<const OptimizerSpec> magnitude;

  void validate() const;
};

// What happened inside the most recent step; consumed by the diagnostics.
struct StepReport {
  double grad_norm_pre_clip = 0.0;
  double grad_norm_post_clip = 0.0;
  bool norm_clipped = false;
  // Coordinate-wise clipping: the vector before clipping and the threshold.
  std::optional<ParamVector> clip_source;
  double clip_threshold = 0.0;
};

class Optimizer {
 public:
  Optimizer(std::size_t dim, double lr, std::optional<double> clip);
  virtual ~Optimizer() = default;
  Optimizer(const Optimizer&) = delete;
  Optimizer& operator=(const Optimizer&) = delete;

  virtual ParamVector step(const ParamVector& g) = 0;

  std::size_t dim() const { return dim_; }
  double lr() const { return lr_; }
  virtual void set_lr(double lr) { lr_ = lr; }
  const StepReport& last_report() const { return report_; }

 protected:
  // Applies the raw-gradient clip (if configured) and fills the norm fields
  // of the report.
  ParamVector prepare_gradient(const ParamVector& g);

  StepReport report_;

 private:
  std::size_t dim_;
  double lr_;
  std::optional<double> clip_;
};

// m <- beta m + g;  delta = -lr m.
class SgdMomentum final : public Optimizer {
 public:
  SgdMomentum(std::size_t dim, double lr, double beta, std::optional<double> clip = std::nullopt);
  ParamVector step(const ParamVector& g) override;
  const ParamVector& momentum() const { return m_; }
  double beta() const { return beta_; }

 private:
  double beta_;
  ParamVector m_;
};

// Bias-corrected Adam: m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2,
// delta = -lr mhat / (sqrt(vhat) + eps).
class Adam final : public Optimizer {
 public:
  Adam(std::size_t dim, double lr, double beta1, double beta2, double eps,
       std::optional<double> clip = std::nullopt);
  ParamVector step(const ParamVector& g) override;
  const ParamVector& first_moment() const { return m_; }
  const ParamVector& second_moment() const { return v_; }
  long step_count() const { return t_; }

 private:
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
  ParamVector m_;
  ParamVector v_;
};

// delta = -lr sign(g)
class SignSgd final : public Optimizer {
 public:
  SignSgd(std::size_t dim, double lr, std::optional<double> clip = std::nullopt);
  ParamVector step(const ParamVector& g) override;
};

// delta = -lr sign(beta m + g); m <- beta m + g.
class SignedMomentum final : public Optimizer {
 public:
  SignedMomentum(std::size_t dim, double lr, double beta,
                 std::optional<double> clip = std::nullopt);
  ParamVector step(const ParamVector& g) override;
  const ParamVector& momentum() const { return m_; }
  void set_momentum(ParamVector m);

 private:
  double beta_;
  ParamVector m_;
};

// SGD with adaptive momentum clipping. After the heavy-ball update the
// threshold tau is the k-th smallest |m_i| with k = ceil((1 - p) d), and the
// step uses sign(m) * min(|m|, tau). Coordinates equal to tau are untouched;
// at most floor(p d) coordinates are clipped. The buffer itself is not
// clipped.
class AdaptiveClipSgd final : public Optimizer {
 public:
  AdaptiveClipSgd(std::size_t dim, double lr, double beta, double clip_fraction,
                  std::optional<double> clip = std::nullopt);
  ParamVector step(const ParamVector& g) override;
  const ParamVector& momentum() const { return m_; }
  double last_threshold() const { return tau_; }
  double clip_fraction() const { return p_; }

 private:
  double beta_;
  double p_;
  double tau_ = 0.0;
  ParamVector m_;
};

// Order index k (1-based) used for the (1 - p)-quantile of d values.
std::size_t quantile_rank(double clip_fraction, std::size_t dim);
// k-th smallest |x_i| with k = quantile_rank(p, d).
double magnitude_quantile(const ParamVector& x, double clip_fraction);
// sign(x) * min(|x|, tau)
ParamVector clip_coordinates(const ParamVector& x, double tau);

// Global grafting: delta = ||M|| * D / ||D|| where D and M are the updates of
// the direction and magnitude rules on the same gradient. D = 0 gives 0.
class Graft final : public Optimizer {
 public:
  Graft(std::unique_ptr<Optimizer> direction, std::unique_ptr<Optimizer> magnitude);
  ParamVector step(const ParamVector& g) override;
  void set_lr(double lr) override;

  const Optimizer& direction() const { return *direction_; }
  const Optimizer& magnitude() const { return *magnitude_; }
  const ParamVector& last_direction_update() const { return last_direction_; }
  const ParamVector& last_magnitude_update() const { return last_magnitude_; }

 private:
  std::unique_ptr<Optimizer> direction_;
  std::unique_ptr<Optimizer> magnitude_;
  ParamVector last_direction_;
  ParamVector last_magnitude_;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t dim);

}  // namespace batchgap
