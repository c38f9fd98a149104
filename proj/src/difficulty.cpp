#include "fapforge/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace fapforge {

FeatureVector extract_features(const ItemSpec& item) {
  FeatureVector f;
  f.rule_count = static_cast<int>(item.rules.size());
  std::set<Direction> directions;
  for (const auto& r : item.rules) {
    ++f.kind_counts[static_cast<std::size_t>(r.relation.kind)];
    directions.insert(r.direction);
  }
  for (const auto& p : item.context) {
    f.entity_count = std::max(f.entity_count, static_cast<int>(p.entities.size()));
  }
  switch (item.organization) {
    case Organization::separation:
      f.organization[0] = 1;
      break;
    case Organization::integration:
      f.organization[1] = 1;
      break;
    case Organization::embedding:
      f.organization[2] = 1;
      break;
    case Organization::none:
      break;
  }
  f.harmonic = item.harmonic;
  f.direction_mix = directions.size() > 1;
  f.format = std::to_string(item.format.rows) + "x" + std::to_string(item.format.cols);
  return f;
}

const std::vector<std::string>& design_columns() {
  static const std::vector<std::string> names = {"rule_count",        "entity_count",
                                                 "binary_relations",  "ternary_relations",
                                                 "nonharmonic",       "direction_mix"};
  return names;
}

std::vector<double> design_row(const FeatureVector& f) {
  int binary = 0;
  int ternary = 0;
  for (int k = 0; k < kRelationKindCount; ++k) {
    const auto cls = relation_class(static_cast<RelationKind>(k));
    if (cls == RelationClass::binary) binary += f.kind_counts[static_cast<std::size_t>(k)];
    if (cls == RelationClass::ternary) ternary += f.kind_counts[static_cast<std::size_t>(k)];
  }
  return {static_cast<double>(f.rule_count), static_cast<double>(f.entity_count),
          static_cast<double>(binary),       static_cast<double>(ternary),
          f.harmonic ? 0.0 : 1.0,            f.direction_mix ? 1.0 : 0.0};
}

DifficultyModel default_model() {
  return DifficultyModel{design_columns(), {-0.5, -0.08, -0.35, -0.25, -0.3, -0.2}, 2.5};
}

DifficultyModel zero_model() {
  return DifficultyModel{design_columns(), std::vector<double>(design_columns().size(), 0.0), 0};
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double predict_row(const DifficultyModel& model, std::span<const double> row) {
  if (row.size() != model.weights.size()) {
    throw SchemaError("model has " + std::to_string(model.weights.size()) +
                      " weights for a row of " + std::to_string(row.size()));
  }
  double eta = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) eta += model.weights[j] * row[j];
  return sigmoid(eta);
}

double predict(const DifficultyModel& model, const FeatureVector& f) {
  if (model.features != design_columns()) {
    throw SchemaError("difficulty model columns do not match the feature schema");
  }
  return predict_row(model, design_row(f));
}

double log_likelihood(const DifficultyModel& model, std::span<const std::vector<double>> rows,
                      std::span<const bool> outcomes) {
  double ll = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double eta = model.intercept;
    for (std::size_t j = 0; j < rows[i].size(); ++j) eta += model.weights[j] * rows[i][j];
    ll += (outcomes[i] ? eta : 0.0) - softplus(eta);
  }
  return ll;
}

namespace {

// Gram-Schmidt factorization z = Q R of centered columns; r[k][i] is the
// coefficient of q_i in column k.
struct Factor {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> r;
};

// Throws FitError naming the first column that is a linear combination of
// earlier ones.
Factor check_rank(std::span<const std::string> names, const std::vector<std::vector<double>>& z) {
  const std::size_t p = z.size();
  const std::size_t n = p == 0 ? 0 : z[0].size();
  std::vector<std::vector<double>> q;        // orthonormal basis
  std::vector<std::size_t> basis_column;     // column each basis vector came from
  std::vector<std::vector<double>> r;        // r[k][i]: coefficient of q_i in column basis_column[k]
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> v = z[j];
    double norm0 = 0;
    for (double x : v) norm0 += x * x;
    norm0 = std::sqrt(norm0);
    std::vector<double> coef(q.size(), 0.0);
    for (std::size_t k = 0; k < q.size(); ++k) {
      double dot = 0;
      for (std::size_t i = 0; i < n; ++i) dot += q[k][i] * v[i];
      coef[k] = dot;
      for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q[k][i];
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm <= 1e-9 * std::max(norm0, 1e-300)) {
      // Express column j through earlier columns: solve R^T-triangular system.
      const std::size_t m = q.size();
      std::vector<double> beta(m, 0.0);
      for (std::size_t k = m; k-- > 0;) {
        double s = coef[k];
        for (std::size_t l = k + 1; l < m; ++l) s -= r[l][k] * beta[l];
        beta[k] = s / r[k][k];
      }
      std::string partners;
      for (std::size_t k = 0; k < m; ++k) {
        if (std::abs(beta[k]) > 1e-6) {
          partners += (partners.empty() ? "" : ", ") + std::string(names[basis_column[k]]);
        }
      }
      throw FitError("collinear features: " + std::string(names[j]) + " with " +
                     (partners.empty() ? std::string("intercept") : partners));
    }
    for (double& x : v) x /= norm;
    coef.push_back(norm);
    r.push_back(coef);
    q.push_back(std::move(v));
    basis_column.push_back(j);
  }
  return Factor{std::move(q), std::move(r)};
}

// Standardized weights beta from coefficients theta on the whitened columns
// u_i = sqrt(n) q_i: R beta = sqrt(n) theta.
std::vector<double> unwhiten(const Factor& f, std::span<const double> theta, double root_n) {
  const std::size_t p = f.r.size();
  std::vector<double> beta(p, 0.0);
  for (std::size_t i = p; i-- > 0;) {
    double s = root_n * theta[i];
    for (std::size_t k = i + 1; k < p; ++k) s -= f.r[k][i] * beta[k];
    beta[i] = s / f.r[i][i];
  }
  return beta;
}

}  // namespace

FitResult fit_rows(std::span<const std::string> names, std::span<const std::vector<double>> rows,
                   std::span<const bool> outcomes, const FitOptions& options) {
  const std::size_t n = rows.size();
  const std::size_t p = names.size();
  if (outcomes.size() != n) throw FitError("rows and outcomes differ in length");
  if (p == 0) throw FitError("no feature columns");
  for (const auto& row : rows) {
    if (row.size() != p) throw SchemaError("design row width differs from the column count");
  }
  if (n < 10 * p) {
    throw FitError("need at least " + std::to_string(10 * p) + " responses for " +
                   std::to_string(p) + " features, got " + std::to_string(n));
  }
  const auto positives = static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), true));
  if (positives == 0 || positives == n) {
    throw FitError("separation: responses contain a single outcome class");
  }

  // Standardize columns.
  std::vector<double> mean(p, 0.0);
  std::vector<double> scale(p, 0.0);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < p; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> z(p, std::vector<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      z[j][i] = rows[i][j] - mean[j];
      ss += z[j][i] * z[j][i];
    }
    scale[j] = std::sqrt(ss / static_cast<double>(n));
    if (scale[j] < 1e-12) {
      throw FitError("collinear features: " + names[j] + " is constant (collinear with intercept)");
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (auto& x : z[j]) x /= scale[j];
  }
  // Ascent runs on whitened columns, where the problem is well conditioned.
  const Factor factor = check_rank(names, z);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) z[j][i] = factor.q[j][i] * root_n;
  }

  // theta[0] is the intercept.
  std::vector<double> theta(p + 1, 0.0);
  std::vector<double> eta(n, 0.0);
  auto update_eta = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double v = theta[0];
      for (std::size_t j = 0; j < p; ++j) v += theta[j + 1] * z[j][i];
      eta[i] = v;
    }
  };
  std::vector<double> grad(p + 1);
  constexpr double kStep = 4.0;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = (outcomes[i] ? 1.0 : 0.0) - sigmoid(eta[i]);
      grad[0] += resid;
      for (std::size_t j = 0; j < p; ++j) grad[j + 1] += resid * z[j][i];
    }
    double gmax = 0;
    for (auto& g : grad) {
      g /= static_cast<double>(n);
      gmax = std::max(gmax, std::abs(g));
    }
    if (gmax < options.tolerance) break;

    // Whitened columns bound the mean Hessian by 1/4, so a step of 4 always
    // ascends.
    for (std::size_t j = 0; j <= p; ++j) theta[j] += kStep * grad[j];
    update_eta();
    const auto beta = unwhiten(factor, std::span<const double>(theta).subspan(1), root_n);
    for (std::size_t j = 0; j < p; ++j) {
      if (std::abs(beta[j]) > 50.0) {
        throw FitError("separation: weight for " + names[j] + " diverges");
      }
    }
  }
  if (iteration == options.max_iterations) {
    const auto beta = unwhiten(factor, std::span<const double>(theta).subspan(1), root_n);
    const auto worst = static_cast<std::size_t>(
        std::max_element(beta.begin(), beta.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        beta.begin());
    throw FitError("separation: no convergence after " + std::to_string(iteration) +
                   " iterations, weight for " + names[worst] + " keeps growing");
  }
  const auto beta = unwhiten(factor, std::span<const double>(theta).subspan(1), root_n);

  FitResult result;
  result.iterations = iteration;
  result.model.features.assign(names.begin(), names.end());
  result.model.weights.resize(p);
  result.model.intercept = theta[0];
  for (std::size_t j = 0; j < p; ++j) {
    result.model.weights[j] = beta[j] / scale[j];
    result.model.intercept -= beta[j] * mean[j] / scale[j];
  }
  result.log_likelihood = log_likelihood(result.model, rows, outcomes);
  return result;
}

FitResult fit(std::span<const Response> responses, const FitOptions& options) {
  std::vector<std::vector<double>> rows;
  std::vector<char> outcomes;
  rows.reserve(responses.size());
  for (const auto& r : responses) {
    rows.push_back(design_row(r.features));
    outcomes.push_back(r.correct ? 1 : 0);
  }
  std::unique_ptr<bool[]> flags(new bool[outcomes.size()]);
  for (std::size_t i = 0; i < outcomes.size(); ++i) flags[i] = outcomes[i] != 0;
  return fit_rows(design_columns(), rows, std::span<const bool>(flags.get(), outcomes.size()),
                  options);
}

}  // namespace fapforge
