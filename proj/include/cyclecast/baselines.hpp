#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cyclecast/model.hpp"

namespace cyclecast {

enum class BaselineKind { Svm, Logistic, Probit, Lstm, Bilstm, Autoencoder, Dnn };

inline constexpr std::array<BaselineKind, 7> kAllBaselines{BaselineKind::Svm,    BaselineKind::Logistic,
                                                           BaselineKind::Probit, BaselineKind::Lstm,
                                                           BaselineKind::Bilstm, BaselineKind::Autoencoder,
                                                           BaselineKind::Dnn};

std::string_view to_string(BaselineKind kind);
/// Throws InvalidConfig for unknown names.
BaselineKind parse_baseline(std::string_view name);
/// True for kinds whose training ignores the seed.
bool is_deterministic(BaselineKind kind);

struct BaselineConfig {
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::vector<std::size_t> lstm_sizes{24, 12, 8};
  std::vector<std::size_t> dnn_sizes{12, 8};
  std::size_t ae_bottleneck = 8;
  // Validation-tuned penalties. Logistic (also the autoencoder's head) uses
  // lambda * ||w||^2 / 2; the SVM uses C.
  std::vector<double> logistic_lambdas{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> svm_cs{0.01, 0.1, 1.0, 10.0};
  std::size_t svm_iterations = 2000;
};

/// Weights of a linear scorer x . coef + intercept.
struct LinearModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  std::size_t iterations = 0;
};

struct RecurrentNet {
  BiLstmStackParams stack;  // no projection; output layer applied per step
  Tensor out_w, out_b;
};

struct DenseNet {
  std::vector<Tensor> w, b;  // hidden layers (relu) then the sigmoid output
};

struct FlatAutoencoder {
  Tensor enc_w, enc_b, dec_w, dec_b;  // tanh encoder, linear decoder
};

struct BaselineModel {
  BaselineKind kind = BaselineKind::Logistic;
  std::size_t input_width = 0;  // flattened w * d, or d for recurrent kinds
  std::optional<LinearModel> linear;  // svm, logistic, probit, autoencoder head
  std::optional<RecurrentNet> rnn;
  std::optional<DenseNet> dnn;
  std::optional<FlatAutoencoder> ae;
  double hyperparameter = 0.0;  // chosen lambda or C
  std::size_t best_epoch = 0;
  std::vector<double> history;  // per-epoch training loss for gradient-trained kinds

  std::size_t parameter_count() const;
};

BaselineModel train_baseline(BaselineKind kind, const std::vector<LabeledWindow>& train_windows,
                             const std::vector<LabeledWindow>& val_windows, const BaselineConfig& config);

/// The SVM reports sigmoid(margin) so that label = (margin >= 0).
std::vector<Prediction> predict_baseline(const BaselineModel& model, const std::vector<LabeledWindow>& windows,
                                         double threshold = 0.5);

double normal_cdf(double x);

// Exposed for tests.
Eigen::MatrixXd flatten_windows(const std::vector<LabeledWindow>& windows);
Eigen::VectorXd window_labels(const std::vector<LabeledWindow>& windows);
/// Ridge-penalised logistic regression by damped Newton steps.
LinearModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);
/// Probit maximum likelihood by Newton-Raphson with step-halving.
LinearModel fit_probit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
/// Soft-margin linear SVM by deterministic full-batch subgradient descent.
LinearModel fit_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double c, std::size_t iterations);
/// Mean reconstruction error trajectory of the flat autoencoder, one entry per
/// epoch, without the classifier head.
std::vector<double> autoencoder_reconstruction_history(const std::vector<LabeledWindow>& train_windows,
                                                       const BaselineConfig& config);

}  // namespace cyclecast
