#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rffsim/fourier_features.hpp"

namespace rffsim::lstm {

// Single-layer LSTM with a per-timestep sigmoid classification head.
//
//   f_t = sig(B1 x_t + B2 gamma_{t-1} + b_f)        forget gate
//   i_t = sig(A1 x_t + A2 gamma_{t-1} + b_i)        input gate
//   o_t = sig(D1 x_t + D2 gamma_{t-1} + b_o)        output gate
//   chi_t = chi_{t-1} o f_t + i_t o tanh(F1 x_t + F2 gamma_{t-1} + b)
//   gamma_t = o_t o tanh(chi_t)
//   p_t = sig(w_out . gamma_t + c_out)
struct LstmParameters {
    Eigen::MatrixXd a1, b1, d1, f1;  // n_h x n_g
    Eigen::MatrixXd a2, b2, d2, f2;  // n_h x n_h
    Eigen::VectorXd bias_i, bias_f, bias_o, bias_c;  // n_h
    Eigen::VectorXd w_out;  // n_h
    double c_out = 0.0;

    Eigen::Index n_hidden() const { return a1.rows(); }
    Eigen::Index n_inputs() const { return a1.cols(); }
};

// Gate weights uniform in [-1/sqrt(n_h), 1/sqrt(n_h)], forget bias 1, other
// biases 0.
LstmParameters init_parameters(int n_inputs, int n_hidden, std::uint64_t seed);

struct LstmState {
    Eigen::VectorXd cell;    // chi_t
    Eigen::VectorXd hidden;  // gamma_t
};

// A batch of aligned feature/label sequences. features[s] is T_s x n_g
// (rows = timesteps); labels[s] has length T_s with entries in {0,1},
// 1 = NLOS (the positive class).
struct SequenceBatch {
    std::vector<Eigen::MatrixXd> features;
    std::vector<std::vector<int>> labels;
};

struct ForwardResult {
    std::vector<LstmState> states;
    std::vector<double> probabilities;  // per timestep, in (0,1)
};

ForwardResult lstm_forward(const LstmParameters& params, const Eigen::MatrixXd& sequence);

struct GradientResult {
    LstmParameters gradients;  // same shapes as the parameters
    double loss = 0.0;         // mean per-timestep binary cross-entropy
};

// Full-sequence BPTT over the batch.
GradientResult lstm_gradients(const LstmParameters& params, const SequenceBatch& batch);

struct TrainOptions {
    double learning_rate = 0.5;
    int epochs = 300;
    std::uint64_t seed = 0;
    double gradient_clip = 5.0;  // global-norm clip
};

// Plain full-batch gradient descent with global-norm clipping. Throws
// TrainingDivergenceError when the loss exceeds 1e6 or turns non-finite.
// loss_history, when given, receives one pre-update loss per epoch.
LstmParameters train(LstmParameters params, const SequenceBatch& batch,
                     const TrainOptions& opts, std::vector<double>* loss_history = nullptr);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

struct EvaluationReport {
    // Absent when the test labels are single-class (F1 undefined); the ROC
    // is still produced.
    std::optional<double> f1;
    std::vector<RocPoint> roc;  // 101 evenly spaced thresholds in [0,1]
    double accuracy = 0.0;
};

EvaluationReport evaluate(const LstmParameters& params, const SequenceBatch& batch);

// CSV emitters: `threshold,fpr,tpr` and `epoch,loss`.
void write_roc_csv(const std::vector<RocPoint>& roc, std::ostream& os);
void write_training_curve_csv(const std::vector<double>& losses, std::ostream& os);

// Optional extra stage ahead of the LSTM: a frozen random affine map with a
// second RFF transform on top. Disabled by default in every pipeline; the
// LSTM itself is agnostic to which stage produced its n_G inputs.
struct FeatureCascade {
    Eigen::MatrixXd weight;       // n_mid x n_in
    Eigen::VectorXd bias;         // n_mid
    rff::FourierFeatureMap map;   // second map, n_out x n_mid
};

FeatureCascade make_feature_cascade(int n_in, int n_mid, int n_out, double sigma,
                                    std::uint64_t seed);

// rows = timesteps; output is rows x n_out.
Eigen::MatrixXd apply_cascade(const FeatureCascade& stage, const Eigen::MatrixXd& features);

// Flat binary record: u64 n_h, u64 n_g header, then tensors in declaration
// order (row-major), little-endian doubles.
void save_parameters(const LstmParameters& params, std::ostream& os);
LstmParameters load_parameters(std::istream& is);

}  // namespace rffsim::lstm
