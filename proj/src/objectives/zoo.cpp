#include <algorithm>
#include <cmath>
#include <memory>

#include "signflow/objectives.hpp"
#include "signflow/rng.hpp"

namespace signflow {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// softplus(w + dz) - softplus(w) without cancellation for small dz.
double softplus_diff(double w, double dz) {
  if (std::abs(dz) > 0.5) return softplus(w + dz) - softplus(w);
  return std::log1p(sigmoid(w) * std::expm1(dz));
}

double log_sum_exp(const Vector& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

Vector softmax(const Vector& x) {
  const double m = x.maxCoeff();
  Vector e = (x.array() - m).exp();
  return e / e.sum();
}

// LSE(y + delta) - LSE(y).
double log_sum_exp_diff(const Vector& y, const Vector& delta) {
  if (delta.cwiseAbs().maxCoeff() > 0.5) return log_sum_exp(y + delta) - log_sum_exp(y);
  const Vector p = softmax(y);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += p[i] * std::expm1(delta[i]);
  return std::log1p(acc);
}

Vector certify(const Vector& table, const Matrix& hessian_bound) {
  const Vector scale = table.cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Matrix normalized = scale.asDiagonal() * hessian_bound * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(normalized, Eigen::EigenvaluesOnly);
  const double rho = std::max(1.0, eig.eigenvalues().maxCoeff());
  return rho * table;
}

std::optional<double> smallest_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Vector log_spaced(int d, double lo, double hi) {
  Vector v(d);
  if (d == 1) {
    v[0] = hi;
    return v;
  }
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < d; ++i) v[i] = lo * std::exp(ratio * i / (d - 1));
  v[0] = lo;
  v[d - 1] = hi;
  return v;
}

void normalize_columns(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0.0) m.col(j) /= n;
  }
}

struct LqData {
  Matrix A, B;
  double gamma, lambda;
};

Objective lq_objective(const ProblemInstance& inst) {
  const auto& spec = inst.spec;
  auto data = std::make_shared<const LqData>(LqData{inst.A, inst.B, spec.gamma, spec.lambda});
  const int d = static_cast<int>(inst.A.cols());

  auto value = [data](const Vector& x) {
    const Vector z = data->B * x;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) acc += softplus(z[j]);
    return 0.5 * (data->A * x).squaredNorm() + data->gamma * acc +
           0.5 * data->lambda * x.squaredNorm();
  };
  auto gradient = [data](const Vector& x) {
    const Vector z = data->B * x;
    const Vector s = z.unaryExpr([](double t) { return sigmoid(t); });
    Vector g = data->A.transpose() * (data->A * x) + data->gamma * (data->B.transpose() * s);
    if (data->lambda != 0.0) g += data->lambda * x;
    return g;
  };
  auto difference = [data](const Vector& x, const Vector& y) {
    const Vector delta = x - y;
    const Vector sum = x + y;
    double out = 0.5 * (data->A * delta).dot(data->A * sum) + 0.5 * data->lambda * delta.dot(sum);
    if (data->gamma != 0.0) {
      const Vector w = data->B * y;
      const Vector dz = data->B * delta;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < w.size(); ++j) acc += softplus_diff(w[j], dz[j]);
      out += data->gamma * acc;
    }
    return out;
  };

  const Matrix ata = inst.A.transpose() * inst.A;
  const Matrix btb = inst.B.transpose() * inst.B;
  Vector table = ata.diagonal() + (spec.gamma / 4.0) * btb.diagonal();
  table.array() += spec.lambda;
  Vector lipschitz = table;
  if (spec.bound == CurvatureBound::Certified) {
    Matrix m = ata + (spec.gamma / 4.0) * btb;
    m.diagonal().array() += spec.lambda;
    lipschitz = certify(table, m);
  }
  std::optional<double> mu;
  const double lam_min = *smallest_eigenvalue(ata);
  const double floor = 1e-12 * std::max(1.0, ata.diagonal().maxCoeff());
  if (lam_min > floor) {
    mu = lam_min + spec.lambda;
  } else if (spec.lambda > 0.0) {
    mu = spec.lambda;
  }
  return Objective("lq", d, value, gradient, lipschitz, mu).with_value_difference(difference);
}

struct SmData {
  Matrix Q;
  double gamma;
};

Objective sm_objective(const ProblemInstance& inst) {
  const auto& spec = inst.spec;
  auto data = std::make_shared<const SmData>(SmData{inst.Q, spec.gamma});
  const int d = static_cast<int>(inst.Q.rows());

  auto value = [data](const Vector& x) {
    return 0.5 * x.dot(data->Q * x) + data->gamma * log_sum_exp(x);
  };
  auto gradient = [data](const Vector& x) {
    Vector g = data->Q * x;
    if (data->gamma != 0.0) g += data->gamma * softmax(x);
    return g;
  };
  auto difference = [data](const Vector& x, const Vector& y) {
    const Vector delta = x - y;
    double out = 0.5 * delta.dot(data->Q * (x + y));
    if (data->gamma != 0.0) out += data->gamma * log_sum_exp_diff(y, delta);
    return out;
  };

  Vector table = inst.Q.diagonal();
  table.array() += spec.gamma / 4.0;
  Vector lipschitz = table;
  if (spec.bound == CurvatureBound::Certified) {
    // The log-sum-exp Hessian diag(p) - p p^T is bounded by I/2.
    Matrix m = inst.Q;
    m.diagonal().array() += spec.gamma / 2.0;
    lipschitz = certify(table, m);
  }
  std::optional<double> mu;
  const double lam_min = *smallest_eigenvalue(inst.Q);
  if (lam_min > 0.0) mu = lam_min;
  return Objective("smoothmax", d, value, gradient, lipschitz, mu)
      .with_value_difference(difference);
}

struct LrData {
  Matrix C;  // rows -y_m a_m
  double lambda;
  double inv_n;
};

Objective lr_objective(const ProblemInstance& inst) {
  const auto& spec = inst.spec;
  const auto n = inst.A.rows();
  Matrix c = (-inst.labels).asDiagonal() * inst.A;
  auto data = std::make_shared<const LrData>(LrData{std::move(c), spec.lambda, 1.0 / n});
  const int d = static_cast<int>(inst.A.cols());

  auto value = [data](const Vector& x) {
    const Vector z = data->C * x;
    double acc = 0.0;
    for (Eigen::Index m = 0; m < z.size(); ++m) acc += softplus(z[m]);
    return data->inv_n * acc + 0.5 * data->lambda * x.squaredNorm();
  };
  auto gradient = [data](const Vector& x) {
    const Vector z = data->C * x;
    const Vector s = z.unaryExpr([](double t) { return sigmoid(t); });
    return Vector(data->inv_n * (data->C.transpose() * s) + data->lambda * x);
  };
  auto difference = [data](const Vector& x, const Vector& y) {
    const Vector delta = x - y;
    const Vector w = data->C * y;
    const Vector dz = data->C * delta;
    double acc = 0.0;
    for (Eigen::Index m = 0; m < w.size(); ++m) acc += softplus_diff(w[m], dz[m]);
    return data->inv_n * acc + 0.5 * data->lambda * delta.dot(x + y);
  };

  const Matrix ata = inst.A.transpose() * inst.A;
  const double quarter_n = 0.25 / static_cast<double>(n);
  Vector table = quarter_n * ata.diagonal();
  table.array() += spec.lambda;
  Vector lipschitz = table;
  if (spec.bound == CurvatureBound::Certified) {
    Matrix m = quarter_n * ata;
    m.diagonal().array() += spec.lambda;
    lipschitz = certify(table, m);
  }
  return Objective("logreg", d, value, gradient, lipschitz, spec.lambda)
      .with_value_difference(difference);
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::LogisticQuadratic:
      return "lq";
    case ProblemKind::SmoothMax:
      return "smoothmax";
    case ProblemKind::L2Logistic:
      return "logreg";
    case ProblemKind::SeparableQuadratic:
      return "sepquad";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "lq") return ProblemKind::LogisticQuadratic;
  if (name == "smoothmax") return ProblemKind::SmoothMax;
  if (name == "logreg") return ProblemKind::L2Logistic;
  if (name == "sepquad") return ProblemKind::SeparableQuadratic;
  throw ConfigError("unknown problem '" + name + "' (expected lq, smoothmax, logreg, sepquad)");
}

ProblemSpec ProblemSpec::defaults(ProblemKind kind) {
  ProblemSpec spec;
  spec.kind = kind;
  if (kind == ProblemKind::L2Logistic) spec.lambda = 1e-3;
  return spec;
}

void ProblemSpec::validate() const {
  if (d < 1) throw ConfigError("problem: d must be >= 1");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigError("problem: kappa must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("problem: gamma must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("problem: lambda must be >= 0");
  }
  if ((kind == ProblemKind::LogisticQuadratic ||
       (kind == ProblemKind::L2Logistic && !dataset_path)) &&
      n < 1) {
    throw ConfigError("problem: n must be >= 1");
  }
  if (kind == ProblemKind::L2Logistic && !(lambda > 0.0)) {
    throw ConfigError("problem: logreg requires lambda > 0");
  }
  if (dataset_path && kind != ProblemKind::L2Logistic) {
    throw ConfigError("problem: --dataset applies to logreg only");
  }
}

ProblemInstance generate_instance(const ProblemSpec& spec) {
  spec.validate();
  ProblemInstance inst;
  inst.spec = spec;
  switch (spec.kind) {
    case ProblemKind::LogisticQuadratic: {
      CounterRng rng_a(derive_seed(spec.seed, "A"));
      CounterRng rng_b(derive_seed(spec.seed, "B"));
      inst.A = rng_a.normal_matrix(spec.n, spec.d);
      inst.B = rng_b.normal_matrix(spec.n, spec.d);
      normalize_columns(inst.A);
      normalize_columns(inst.B);
      break;
    }
    case ProblemKind::SmoothMax: {
      CounterRng rng(derive_seed(spec.seed, "U"));
      const Matrix g = rng.normal_matrix(spec.d, spec.d);
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix u = qr.householderQ();
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int j = 0; j < spec.d; ++j) {
        if (r(j, j) < 0.0) u.col(j) = -u.col(j);
      }
      const Vector spectrum = log_spaced(spec.d, 1.0 / spec.kappa, 1.0);
      Matrix q = u * spectrum.asDiagonal() * u.transpose();
      inst.Q = 0.5 * (q + q.transpose());
      break;
    }
    case ProblemKind::L2Logistic: {
      if (spec.dataset_path) {
        Dataset data = load_csv_dataset(*spec.dataset_path);
        inst.A = std::move(data.features);
        inst.labels = std::move(data.labels);
        inst.spec.n = static_cast<int>(inst.A.rows());
        inst.spec.d = static_cast<int>(inst.A.cols());
      } else {
        CounterRng rng_x(derive_seed(spec.seed, "features"));
        CounterRng rng_w(derive_seed(spec.seed, "hyperplane"));
        CounterRng rng_y(derive_seed(spec.seed, "labels"));
        inst.A = rng_x.normal_matrix(spec.n, spec.d);
        const Vector w = rng_w.normal_vector(spec.d);
        const Vector margin = inst.A * w;
        inst.labels.resize(spec.n);
        for (int m = 0; m < spec.n; ++m) {
          double y = margin[m] >= 0.0 ? 1.0 : -1.0;
          if (rng_y.uniform() < kLabelFlipRate) y = -y;
          inst.labels[m] = y;
        }
      }
      standardize_columns(inst.A);
      break;
    }
    case ProblemKind::SeparableQuadratic: {
      CounterRng rng(derive_seed(spec.seed, "center"));
      inst.sep_lipschitz = log_spaced(spec.d, 1.0, spec.kappa);
      inst.sep_center = rng.normal_vector(spec.d);
      break;
    }
  }
  return inst;
}

Objective build_objective(const ProblemInstance& inst) {
  switch (inst.spec.kind) {
    case ProblemKind::LogisticQuadratic:
      return lq_objective(inst);
    case ProblemKind::SmoothMax:
      return sm_objective(inst);
    case ProblemKind::L2Logistic:
      return lr_objective(inst);
    case ProblemKind::SeparableQuadratic:
      return make_separable_quadratic(inst.sep_lipschitz, inst.sep_center);
  }
  throw ConfigError("unknown problem kind");
}

Vector default_start(const ProblemInstance& inst) {
  const int d = static_cast<int>(inst.spec.kind == ProblemKind::L2Logistic ? inst.A.cols()
                                                                           : inst.spec.d);
  if (inst.spec.kind == ProblemKind::SmoothMax) {
    CounterRng rng(derive_seed(inst.spec.seed, "x0"));
    return rng.normal_vector(d);
  }
  return Vector::Zero(d);
}

Objective make_problem(const ProblemSpec& spec) { return build_objective(generate_instance(spec)); }

Objective make_logistic_quadratic(const ProblemSpec& spec) {
  if (spec.kind != ProblemKind::LogisticQuadratic) throw ConfigError("expected an lq spec");
  return make_problem(spec);
}

Objective make_smooth_max(const ProblemSpec& spec) {
  if (spec.kind != ProblemKind::SmoothMax) throw ConfigError("expected a smoothmax spec");
  return make_problem(spec);
}

Objective make_l2_logistic(const ProblemSpec& spec) {
  if (spec.kind != ProblemKind::L2Logistic) throw ConfigError("expected a logreg spec");
  return make_problem(spec);
}

Objective make_separable_quadratic(const Vector& lipschitz, const Vector& center) {
  if (lipschitz.size() != center.size() || lipschitz.size() < 1) {
    throw ConfigError("sepquad: L and x_star must have the same positive length");
  }
  require_finite(lipschitz, "sepquad L");
  require_finite(center, "sepquad x_star");
  if ((lipschitz.array() <= 0.0).any()) throw ConfigError("sepquad: all L_i must be > 0");
  auto l = std::make_shared<const Vector>(lipschitz);
  auto c = std::make_shared<const Vector>(center);
  auto value = [l, c](const Vector& x) {
    return 0.5 * (l->array() * (x - *c).array().square()).sum();
  };
  auto gradient = [l, c](const Vector& x) { return Vector(l->array() * (x - *c).array()); };
  auto difference = [l, c](const Vector& x, const Vector& y) {
    return 0.5 * (l->array() * (x - y).array() * ((x - *c) + (y - *c)).array()).sum();
  };
  return Objective("sepquad", static_cast<int>(lipschitz.size()), value, gradient, lipschitz,
                   lipschitz.minCoeff())
      .with_value_difference(difference)
      .with_reference(Reference{center, 0.0});
}

}  // namespace signflow
