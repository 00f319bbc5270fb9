#pragma once

// L2-regularized multinomial logistic regression over embeddings, plus
// accuracy / F1 reporting.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace compsim {

/// Per-dimension z-scoring with statistics from the training rows.
/// Constant columns get std 1 so they map to 0.
struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  static Standardizer fit(const Eigen::MatrixXd& X);
  static Standardizer identity(Eigen::Index dimension);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Mean cross-entropy + (lambda / 2) * ||W without bias column||^2.
///
/// W is C x (d + 1) with the bias in the last column; rows of `features`
/// are already standardized.
class SoftmaxObjective {
public:
  SoftmaxObjective(Eigen::MatrixXd features, std::vector<int> labels, int n_classes, double lambda);

  double value(const Eigen::MatrixXd& W) const;
  double value_and_gradient(const Eigen::MatrixXd& W, Eigen::MatrixXd& gradient) const;

  Eigen::Index n_rows() const { return features_.rows(); }
  Eigen::Index dimension() const { return features_.cols(); }
  int n_classes() const { return n_classes_; }

private:
  Eigen::MatrixXd logits(const Eigen::MatrixXd& W) const;

  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  int n_classes_;
  double lambda_;
};

enum class Termination { Converged, MaxIterations, LineSearchStalled };
std::string_view to_string(Termination t);

struct FitOptions {
  double lambda = 1.0;
  double tol = 1e-6;  // on the gradient infinity-norm
  int max_iter = 5000;
  std::uint64_t seed = 0;
  bool shuffle = false;  // permute rows before fitting (seeded)
  bool standardize = true;
  bool require_convergence = false;  // throw ComputeError instead of reporting
  std::optional<Eigen::MatrixXd> initial_weights;  // default zeros
};

struct FitDiagnostics {
  Termination reason = Termination::MaxIterations;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::vector<double> objective_history;  // one entry per accepted iterate, starting at W0

  bool converged() const { return reason == Termination::Converged; }
};

struct ModelMetadata {
  std::string provider_id;
  std::size_t context_budget = 0;
  std::string label_level;
  std::uint64_t seed = 0;

  bool operator==(const ModelMetadata&) const = default;
};

struct SoftmaxClassifier {
  std::vector<std::string> classes;  // sorted
  Eigen::MatrixXd weights;           // C x (d + 1)
  double lambda = 1.0;
  Standardizer standardizer;
  ModelMetadata metadata;
  FitDiagnostics diagnostics;

  Eigen::Index dimension() const { return weights.cols() - 1; }
  Eigen::VectorXd logits(const Eigen::VectorXd& x) const;
};

SoftmaxClassifier fit(const Eigen::MatrixXd& X, const std::vector<std::string>& y,
                      const FitOptions& options = {});

/// Probabilities over model.classes via a max-shifted softmax.
Eigen::VectorXd predict_proba(const SoftmaxClassifier& model, const Eigen::VectorXd& x);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Argmax of predict_proba; ties go to the earlier class.
std::string predict(const SoftmaxClassifier& model, const Eigen::VectorXd& x);
std::size_t argmax_first(const Eigen::VectorXd& v);

/// Classes sorted by descending probability, ties by class order.
std::vector<std::pair<std::string, double>> soft_sector_distribution(const SoftmaxClassifier& model,
                                                                     const Eigen::VectorXd& x);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // rows with this true label
};

struct ClassificationReport {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::vector<std::string> classes;  // union of truth and predictions, sorted
  std::vector<ClassMetrics> per_class;
  Eigen::MatrixXi confusion;  // rows = truth, cols = prediction
};

ClassificationReport evaluate(const std::vector<std::string>& predictions,
                              const std::vector<std::string>& truth);

void save_model(const SoftmaxClassifier& model, const std::string& path);
SoftmaxClassifier load_model(const std::string& path);

} // namespace compsim
