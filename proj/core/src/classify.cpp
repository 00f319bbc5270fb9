#include "compsim/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "compsim/error.hpp"
#include "compsim/random.hpp"

namespace compsim {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw ArgumentError("standardizer: no rows");
  Standardizer s;
  s.means = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - s.means.transpose();
  s.stds = (centered.array().square().colwise().sum() / static_cast<double>(X.rows())).sqrt().transpose();
  for (Eigen::Index i = 0; i < s.stds.size(); ++i) {
    if (!(s.stds[i] > 1e-12)) s.stds[i] = 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index dimension) {
  return {Eigen::VectorXd::Zero(dimension), Eigen::VectorXd::Ones(dimension)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != means.size()) throw ArgumentError("standardizer: dimension mismatch");
  return ((X.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array()).matrix();
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != means.size()) throw ArgumentError("standardizer: dimension mismatch");
  return ((x - means).array() / stds.array()).matrix();
}

// ---------------------------------------------------------------------------

SoftmaxObjective::SoftmaxObjective(Eigen::MatrixXd features, std::vector<int> labels, int n_classes,
                                   double lambda)
    : features_(std::move(features)), labels_(std::move(labels)), n_classes_(n_classes), lambda_(lambda) {
  if (static_cast<Eigen::Index>(labels_.size()) != features_.rows()) {
    throw ArgumentError("objective: label count != row count");
  }
  if (features_.rows() == 0) throw ArgumentError("objective: no rows");
  if (n_classes_ < 2) throw ArgumentError("objective: need at least 2 classes");
  if (!(lambda_ >= 0.0)) throw ArgumentError("objective: lambda must be >= 0");
  for (int l : labels_) {
    if (l < 0 || l >= n_classes_) throw ArgumentError("objective: label out of range");
  }
}

Eigen::MatrixXd SoftmaxObjective::logits(const Eigen::MatrixXd& W) const {
  if (W.rows() != n_classes_ || W.cols() != features_.cols() + 1) {
    throw ArgumentError("objective: weight shape mismatch");
  }
  const auto d = features_.cols();
  // n x C
  Eigen::MatrixXd z = features_ * W.leftCols(d).transpose();
  z.rowwise() += W.col(d).transpose();
  return z;
}

double SoftmaxObjective::value(const Eigen::MatrixXd& W) const {
  const auto z = logits(W);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    loss += lse - z(i, labels_[static_cast<std::size_t>(i)]);
  }
  const auto d = features_.cols();
  return loss / static_cast<double>(z.rows()) + 0.5 * lambda_ * W.leftCols(d).squaredNorm();
}

double SoftmaxObjective::value_and_gradient(const Eigen::MatrixXd& W, Eigen::MatrixXd& gradient) const {
  Eigen::MatrixXd z = logits(W);
  const auto n = static_cast<double>(z.rows());
  const auto d = features_.cols();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    auto e = (z.row(i).array() - m).exp();
    const double s = e.sum();
    const int y = labels_[static_cast<std::size_t>(i)];
    loss += m + std::log(s) - z(i, y);
    z.row(i) = e / s;  // z now holds probabilities
    z(i, y) -= 1.0;
  }
  gradient.resize(W.rows(), W.cols());
  gradient.leftCols(d) = z.transpose() * features_ / n + lambda_ * W.leftCols(d);
  gradient.col(d) = z.colwise().sum().transpose() / n;
  return loss / n + 0.5 * lambda_ * W.leftCols(d).squaredNorm();
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iter";
    case Termination::LineSearchStalled: return "line_search_stalled";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

FitDiagnostics minimize(const SoftmaxObjective& objective, Eigen::MatrixXd& W, const FitOptions& options) {
  constexpr double kArmijo = 1e-4;
  FitDiagnostics diag;
  Eigen::MatrixXd grad;
  double f = objective.value_and_gradient(W, grad);
  diag.objective_history.push_back(f);
  const auto d = objective.dimension();
  double step = 1.0;
  for (;;) {
    diag.gradient_norm = grad.cwiseAbs().maxCoeff();
    diag.objective = f;
    if (diag.gradient_norm <= options.tol) {
      diag.reason = Termination::Converged;
      break;
    }
    if (diag.iterations >= options.max_iter) {
      diag.reason = Termination::MaxIterations;
      break;
    }
    // diagonal preconditioner: penalized columns scaled by 1 / (1 + lambda)
    Eigen::MatrixXd direction = grad;
    direction.leftCols(d) /= 1.0 + options.lambda;
    const double g2 = (grad.array() * direction.array()).sum();
    bool accepted = false;
    Eigen::MatrixXd candidate;
    double f_new = f;
    for (int halvings = 0; halvings < 80; ++halvings) {
      candidate = W - step * direction;
      f_new = objective.value(candidate);
      if (std::isfinite(f_new) && f_new <= f - kArmijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      diag.reason = Termination::LineSearchStalled;
      break;
    }
    W = std::move(candidate);
    f = objective.value_and_gradient(W, grad);
    diag.objective_history.push_back(f);
    ++diag.iterations;
    step *= 2.0;
  }
  return diag;
}

} // namespace

SoftmaxClassifier fit(const Eigen::MatrixXd& X, const std::vector<std::string>& y, const FitOptions& options) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw ArgumentError("fit: |X| != |y|");
  if (!(options.lambda >= 0.0)) throw ArgumentError("fit: lambda must be >= 0");
  if (!X.allFinite()) throw ArgumentError("fit: non-finite features");
  std::set<std::string> class_set(y.begin(), y.end());
  if (class_set.size() < 2) throw ArgumentError("fit: need at least 2 classes");
  if (y.size() < class_set.size()) throw ArgumentError("fit: fewer rows than classes");

  SoftmaxClassifier model;
  model.classes.assign(class_set.begin(), class_set.end());
  model.lambda = options.lambda;
  model.metadata.seed = options.seed;
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < model.classes.size(); ++i) class_index[model.classes[i]] = static_cast<int>(i);

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  if (options.shuffle) {
    Rng rng(options.seed);
    shuffle(std::span<std::size_t>(order), rng);
  }
  Eigen::MatrixXd rows(X.rows(), X.cols());
  std::vector<int> labels(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[i]));
    labels[i] = class_index.at(y[order[i]]);
  }

  model.standardizer = options.standardize ? Standardizer::fit(rows) : Standardizer::identity(rows.cols());
  SoftmaxObjective objective(model.standardizer.apply(rows), std::move(labels),
                             static_cast<int>(model.classes.size()), options.lambda);

  const auto C = static_cast<Eigen::Index>(model.classes.size());
  if (options.initial_weights) {
    if (options.initial_weights->rows() != C || options.initial_weights->cols() != X.cols() + 1) {
      throw ArgumentError("fit: initial weights have the wrong shape");
    }
    model.weights = *options.initial_weights;
  } else {
    model.weights = Eigen::MatrixXd::Zero(C, X.cols() + 1);
  }
  model.diagnostics = minimize(objective, model.weights, options);
  if (options.require_convergence && !model.diagnostics.converged()) {
    throw ComputeError("logistic regression did not converge (" +
                       std::string(to_string(model.diagnostics.reason)) + ", gradient norm " +
                       std::to_string(model.diagnostics.gradient_norm) + ")");
  }
  return model;
}

Eigen::VectorXd SoftmaxClassifier::logits(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) {
    throw ArgumentError("predict: input dimension " + std::to_string(x.size()) + " != model dimension " +
                        std::to_string(dimension()));
  }
  const auto z = standardizer.apply(x);
  return weights.leftCols(dimension()) * z + weights.col(dimension());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd predict_proba(const SoftmaxClassifier& model, const Eigen::VectorXd& x) {
  return softmax(model.logits(x));
}

std::size_t argmax_first(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::string predict(const SoftmaxClassifier& model, const Eigen::VectorXd& x) {
  return model.classes[argmax_first(predict_proba(model, x))];
}

std::vector<std::pair<std::string, double>> soft_sector_distribution(const SoftmaxClassifier& model,
                                                                     const Eigen::VectorXd& x) {
  const auto p = predict_proba(model, x);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    out.emplace_back(model.classes[i], p[static_cast<Eigen::Index>(i)]);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

// ---------------------------------------------------------------------------

ClassificationReport evaluate(const std::vector<std::string>& predictions,
                              const std::vector<std::string>& truth) {
  if (predictions.size() != truth.size()) throw ArgumentError("evaluate: length mismatch");
  if (truth.empty()) throw ArgumentError("evaluate: no rows");
  std::set<std::string> labels(truth.begin(), truth.end());
  labels.insert(predictions.begin(), predictions.end());

  ClassificationReport r;
  r.classes.assign(labels.begin(), labels.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < r.classes.size(); ++i) index[r.classes[i]] = static_cast<int>(i);
  const auto C = static_cast<Eigen::Index>(r.classes.size());
  r.confusion = Eigen::MatrixXi::Zero(C, C);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion(index[truth[i]], index[predictions[i]]);
    if (truth[i] == predictions[i]) ++correct;
  }
  const auto n = static_cast<double>(truth.size());
  r.accuracy = static_cast<double>(correct) / n;

  // pooled counts: every wrong prediction is one FP and one FN
  const auto tp = static_cast<double>(correct);
  const auto wrong = n - tp;
  r.micro_f1 = 2.0 * tp / (2.0 * tp + wrong + wrong);

  double weighted = 0.0;
  for (Eigen::Index c = 0; c < C; ++c) {
    ClassMetrics m;
    const double hit = r.confusion(c, c);
    const double predicted = r.confusion.col(c).sum();
    const double actual = r.confusion.row(c).sum();
    m.support = static_cast<std::size_t>(actual);
    m.precision = predicted > 0 ? hit / predicted : 0.0;
    m.recall = actual > 0 ? hit / actual : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    weighted += actual * m.f1;
    r.per_class.push_back(m);
  }
  r.weighted_f1 = weighted / n;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

void save_model(const SoftmaxClassifier& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "compsim-softmax";
  j["version"] = 1;
  j["classes"] = model.classes;
  j["lambda"] = model.lambda;
  j["standardizer"] = {{"means", to_vector(model.standardizer.means)},
                       {"stds", to_vector(model.standardizer.stds)}};
  j["rows"] = model.weights.rows();
  j["cols"] = model.weights.cols();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(model.weights.size()));
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) flat.push_back(model.weights(r, c));
  }
  j["weights"] = flat;
  j["metadata"] = {{"provider_id", model.metadata.provider_id},
                   {"context_budget", model.metadata.context_budget},
                   {"label_level", model.metadata.label_level},
                   {"seed", model.metadata.seed},
                   {"termination", to_string(model.diagnostics.reason)},
                   {"iterations", model.diagnostics.iterations},
                   {"objective", model.diagnostics.objective},
                   {"gradient_norm", model.diagnostics.gradient_norm}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(1) << '\n';
}

SoftmaxClassifier load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model " + path);
  SoftmaxClassifier m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.lambda = j.at("lambda").get<double>();
    m.standardizer.means = from_vector(j.at("standardizer").at("means").get<std::vector<double>>());
    m.standardizer.stds = from_vector(j.at("standardizer").at("stds").get<std::vector<double>>());
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto flat = j.at("weights").get<std::vector<double>>();
    if (rows != static_cast<Eigen::Index>(m.classes.size()) || rows < 2 || cols < 2 ||
        static_cast<Eigen::Index>(flat.size()) != rows * cols ||
        m.standardizer.means.size() != cols - 1 || m.standardizer.stds.size() != cols - 1) {
      throw DataError("model shape is inconsistent");
    }
    m.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m.weights(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    if (!m.weights.allFinite()) throw DataError("model weights are not finite");
    const auto& meta = j.at("metadata");
    m.metadata.provider_id = meta.value("provider_id", std::string{});
    m.metadata.context_budget = meta.value("context_budget", std::size_t{0});
    m.metadata.label_level = meta.value("label_level", std::string{});
    m.metadata.seed = meta.value("seed", std::uint64_t{0});
    m.diagnostics.iterations = meta.value("iterations", 0);
    m.diagnostics.objective = meta.value("objective", 0.0);
    m.diagnostics.gradient_norm = meta.value("gradient_norm", 0.0);
    const auto term = meta.value("termination", std::string{"max_iter"});
    m.diagnostics.reason = term == "converged"     ? Termination::Converged
                           : term == "line_search_stalled" ? Termination::LineSearchStalled
                                                           : Termination::MaxIterations;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  return m;
}

} // namespace compsim
