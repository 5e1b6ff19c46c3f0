#include "signflow/core.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace signflow {

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": entries must be finite");
  }
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": entries must be finite");
  }
}

Vector sign_elementwise(const Vector& v) {
  return v.unaryExpr([](double e) { return sign_of(e); });
}

double norm(const Vector& v, NormKind p) {
  switch (p) {
    case NormKind::L1:
      return v.lpNorm<1>();
    case NormKind::L2:
      return v.norm();
    case NormKind::Linf:
      return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

std::vector<int> active_set(const Vector& g, double eps_active) {
  if (!(eps_active >= 0.0)) throw std::invalid_argument("active_set: eps_active must be >= 0");
  std::vector<int> out;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) > eps_active) out.push_back(static_cast<int>(i));
  }
  return out;
}

double sum_over(const Vector& weights, const std::vector<int>& indices) {
  double s = 0.0;
  for (int i : indices) s += weights[i];
  return s;
}

Objective::Objective(std::string name, int dim, ValueFn value, GradientFn gradient,
                     Vector coord_lipschitz, std::optional<double> mu)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      lipschitz_(std::move(coord_lipschitz)),
      lipschitz_l1_(0.0),
      mu_(mu) {
  if (dim_ < 1) throw std::invalid_argument("Objective: dim must be positive");
  if (lipschitz_.size() != dim_) {
    throw std::invalid_argument("Objective: coord_lipschitz length must equal dim");
  }
  require_finite(lipschitz_, "Objective coord_lipschitz");
  if ((lipschitz_.array() < 0.0).any()) {
    throw std::invalid_argument("Objective: coord_lipschitz entries must be >= 0");
  }
  lipschitz_l1_ = lipschitz_.sum();
  if (!(lipschitz_l1_ > 0.0)) throw std::invalid_argument("Objective: sum of L_i must be > 0");
  if (mu_ && !(*mu_ > 0.0 && std::isfinite(*mu_))) {
    throw std::invalid_argument("Objective: mu must be positive and finite");
  }
}

Objective Objective::with_reference(Reference reference) const {
  check_dim(reference.x_star);
  require_finite(reference.x_star, "reference x_star");
  Objective copy = *this;
  copy.reference_offset_ = value_(reference.x_star) - reference.f_star;
  copy.reference_ = std::move(reference);
  return copy;
}

Objective Objective::with_value_difference(DifferenceFn diff) const {
  Objective copy = *this;
  copy.difference_ = std::move(diff);
  return copy;
}

Objective Objective::with_mu(std::optional<double> mu) const {
  if (mu && !(*mu > 0.0)) throw std::invalid_argument("Objective: mu must be positive");
  Objective copy = *this;
  copy.mu_ = mu;
  return copy;
}

void Objective::check_dim(const Vector& x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument(name_ + ": expected a vector of dimension " +
                                std::to_string(dim_) + ", got " + std::to_string(x.size()));
  }
}

double Objective::value(const Vector& x) const {
  check_dim(x);
  return value_(x);
}

Vector Objective::gradient(const Vector& x) const {
  check_dim(x);
  return gradient_(x);
}

double Objective::value_difference(const Vector& x, const Vector& y) const {
  check_dim(x);
  check_dim(y);
  if (difference_) return difference_(x, y);
  return value_(x) - value_(y);
}

double Objective::gap(const Vector& x) const {
  if (!reference_) throw std::logic_error(name_ + ": gap requested without a reference");
  // The offset is exactly zero when f_star was computed by value().
  return value_difference(x, reference_->x_star) + reference_offset_;
}

int RunTrace::total_restarts() const {
  return std::accumulate(records.begin(), records.end(), 0,
                         [](int s, const TraceRecord& r) { return s + r.restarts; });
}

int RunTrace::total_freezes() const {
  return std::accumulate(records.begin(), records.end(), 0,
                         [](int s, const TraceRecord& r) { return s + r.freezes; });
}

int RunTrace::total_slides() const {
  return std::accumulate(records.begin(), records.end(), 0,
                         [](int s, const TraceRecord& r) { return s + r.slides; });
}

}  // namespace signflow
