#include <cmath>
#include <limits>

#include <json.hpp>

#include "signet/hoc.hpp"

namespace signet {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double logistic_objective(const DenseFactor& x, std::span<const Sign> y, double lambda, std::span<const double> theta,
                          std::vector<double>* grad) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (y.size() != n || theta.size() != p + 1) throw Error("logistic: dimension mismatch");
  if (grad) grad->assign(p + 1, 0.0);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double z = theta[0];
    for (std::size_t c = 0; c < p; ++c) z += theta[c + 1] * x(r, c);
    const double yr = y[r];
    loss += softplus(-yr * z);
    if (grad) {
      // d/dz log(1 + exp(-y z)) = -y sigmoid(-y z)
      const double d = -yr * sigmoid(-yr * z);
      (*grad)[0] += d;
      for (std::size_t c = 0; c < p; ++c) (*grad)[c + 1] += d * x(r, c);
    }
  }
  double reg = 0.0;
  for (std::size_t c = 1; c <= p; ++c) reg += theta[c] * theta[c];
  const double inv = 1.0 / static_cast<double>(n);
  if (grad) {
    for (std::size_t c = 0; c <= p; ++c) {
      (*grad)[c] *= inv;
      if (c > 0) (*grad)[c] += lambda * inv * theta[c];
    }
  }
  return loss * inv + 0.5 * lambda * inv * reg;
}

double LogisticModel::margin(std::span<const double> features) const {
  if (features.size() != weights.size())
    throw Error("logistic: feature length " + std::to_string(features.size()) + " does not match model width " +
                std::to_string(weights.size()));
  double z = bias;
  for (std::size_t c = 0; c < weights.size(); ++c)
    if (scale[c] > 0.0) z += weights[c] * (features[c] - mean[c]) / scale[c];
  return z;
}

double LogisticModel::probability(std::span<const double> features) const { return sigmoid(margin(features)); }

std::string LogisticModel::to_json() const {
  nlohmann::json j;
  j["columns"] = columns;
  j["mean"] = mean;
  j["scale"] = scale;
  j["weights"] = weights;
  j["bias"] = bias;
  j["lambda"] = lambda;
  j["iterations"] = iterations;
  j["prior_only"] = prior_only;
  return j.dump(2);
}

LogisticModel LogisticModel::from_json(const std::string& text) {
  LogisticModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.mean = j.at("mean").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.lambda = j.value("lambda", 1.0);
    m.iterations = j.value("iterations", 0);
    m.prior_only = j.value("prior_only", false);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("logistic model: ") + e.what());
  }
  const std::size_t p = m.weights.size();
  if (m.mean.size() != p || m.scale.size() != p || m.columns.size() != p)
    throw ParseError("logistic model: inconsistent vector lengths");
  return m;
}

LogisticModel train_logistic(const FeatureMatrix& f, std::span<const Sign> labels, const LogisticOptions& opts,
                             std::vector<double>* objective_trace) {
  const auto n = static_cast<std::size_t>(f.values.rows());
  const auto p = static_cast<std::size_t>(f.values.cols());
  if (labels.size() != n) throw Error("logistic: label count does not match feature rows");
  if (n == 0) throw Error("logistic: no training examples");
  if (opts.lambda < 0.0) throw Error("logistic: lambda must be non-negative");
  if (!f.values.allFinite()) throw Error("logistic: non-finite feature value");

  LogisticModel m;
  m.columns = f.columns.size() == p ? f.columns : std::vector<std::string>(p);
  m.lambda = opts.lambda;
  m.mean.assign(p, 0.0);
  m.scale.assign(p, 0.0);
  m.weights.assign(p, 0.0);

  std::size_t pos = 0;
  for (Sign s : labels) {
    if (s != 1 && s != -1) throw Error("logistic: labels must be +1 or -1");
    pos += s > 0;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    m.prior_only = true;
    m.bias = std::log((static_cast<double>(pos) + 0.5) / (static_cast<double>(neg) + 0.5));
    return m;
  }

  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < p; ++c) {
    const double mu = f.values.col(static_cast<Eigen::Index>(c)).mean();
    const double var = (f.values.col(static_cast<Eigen::Index>(c)).array() - mu).square().mean();
    const double sd = std::sqrt(var);
    m.mean[c] = mu;
    if (sd > 1e-12 * std::max(1.0, std::abs(mu))) {
      m.scale[c] = sd;
      kept.push_back(c);
    }
  }
  DenseFactor z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(kept[k]);
    z.col(static_cast<Eigen::Index>(k)) = (f.values.col(c).array() - m.mean[kept[k]]) / m.scale[kept[k]];
  }

  const std::size_t dim = kept.size() + 1;
  std::vector<double> theta(dim, 0.0), grad, trial(dim), trial_grad;
  theta[0] = std::log(static_cast<double>(pos) / static_cast<double>(neg));
  double obj = logistic_objective(z, labels, opts.lambda, theta, &grad);
  if (objective_trace) objective_trace->push_back(obj);
  // Standardized columns bound the Hessian by (1 + p) / 4 + lambda / n.
  double step = 1.0 / (0.25 * static_cast<double>(dim) + opts.lambda / static_cast<double>(n));
  int it = 0;
  for (; it < opts.max_iter && inf_norm(grad) > opts.tol; ++it) {
    double gg = 0.0;
    for (double g : grad) gg += g * g;
    bool accepted = false;
    double a = step;
    double trial_obj = obj;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t c = 0; c < dim; ++c) trial[c] = theta[c] - a * grad[c];
      trial_obj = logistic_objective(z, labels, opts.lambda, trial, &trial_grad);
      if (trial_obj <= obj - 1e-4 * a * gg) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;
    double ss = 0.0, sy = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double s = trial[c] - theta[c];
      const double yv = trial_grad[c] - grad[c];
      ss += s * s;
      sy += s * yv;
    }
    theta.swap(trial);
    grad.swap(trial_grad);
    obj = trial_obj;
    if (objective_trace) objective_trace->push_back(obj);
    step = sy > 0.0 ? ss / sy : a * 2.0;
  }
  m.iterations = it;
  m.bias = theta[0];
  for (std::size_t k = 0; k < kept.size(); ++k) m.weights[kept[k]] = theta[k + 1];
  return m;
}

Sign predict_hoc(const LogisticModel& model, const FeatureMatrix& f, std::size_t row) {
  if (row >= static_cast<std::size_t>(f.values.rows())) throw Error("hoc: row out of range");
  const auto r = f.values.row(static_cast<Eigen::Index>(row));
  return sign_of(model.margin(std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))));
}

}  // namespace signet
