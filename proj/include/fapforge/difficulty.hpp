#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fapforge/item.hpp"

namespace fapforge {

class FitError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kRelationKindCount = 8;

struct FeatureVector {
  int rule_count = 0;
  std::array<int, kRelationKindCount> kind_counts{};  // indexed by RelationKind
  int entity_count = 0;                               // max entities over context panels
  std::array<int, 3> organization{};                  // separation, integration, embedding
  bool harmonic = true;
  bool direction_mix = false;
  std::string format = "3x3";

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector extract_features(const ItemSpec& item);

// Columns of the model's design row, in order.
const std::vector<std::string>& design_columns();
std::vector<double> design_row(const FeatureVector& f);

struct DifficultyModel {
  std::vector<std::string> features;  // must equal design_columns()
  std::vector<double> weights;
  double intercept = 0;

  friend bool operator==(const DifficultyModel&, const DifficultyModel&) = default;
};

// Hand-set weights used until a model is fitted to response data.
DifficultyModel default_model();
DifficultyModel zero_model();

// logistic(intercept + weights · design_row(f)); probability of a correct
// response at ability 0. Throws SchemaError on a column mismatch.
double predict(const DifficultyModel& model, const FeatureVector& f);
double predict_row(const DifficultyModel& model, std::span<const double> row);

struct Response {
  FeatureVector features;
  bool correct = false;
};

struct FitOptions {
  int max_iterations = 20000;
  double tolerance = 1e-8;  // on the max-norm of the mean gradient
};

struct FitResult {
  DifficultyModel model;
  int iterations = 0;
  double log_likelihood = 0;
};

// Maximum-likelihood logistic fit by batch gradient ascent. Throws FitError
// on too few rows, a single outcome class, collinear columns, or separation.
FitResult fit(std::span<const Response> responses, const FitOptions& options = {});

// Same over raw design rows; `names` label the columns in error messages.
FitResult fit_rows(std::span<const std::string> names, std::span<const std::vector<double>> rows,
                   std::span<const bool> outcomes, const FitOptions& options = {});

double log_likelihood(const DifficultyModel& model, std::span<const std::vector<double>> rows,
                      std::span<const bool> outcomes);

}  // namespace fapforge
