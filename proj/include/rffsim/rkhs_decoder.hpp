#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rffsim/fourier_features.hpp"
#include "rffsim/ldpc.hpp"

namespace rffsim::ldpc {

// Ridge-regression detector in RFF space: Omega maps whole-word features to
// per-bit soft outputs. The feature dimension equals the codeword length.
// lambda selects the feature variant: absent = classical RFF, set = DD-RFF
// damping; either variant keeps every shape identical.
struct RkhsDetector {
    Eigen::MatrixXd omega;        // n_G x C
    rff::FourierFeatureMap map;   // n_G == C
    std::optional<double> lambda; // DD damping bandwidth, if any
    double ridge = 0.0;
    double sigma_hat_sq = 1.0;    // pooled variance of the fitted outputs
};

// Least squares over the batch (rows = received words):
//   min_Omega sum_w ||Omega^T phi(y_w) - sign(y_w)||^2 + ridge ||Omega||^2.
// Solved in dual form; ridge = 0 with a rank-deficient Gram throws.
RkhsDetector fit_detector(const std::vector<Eigen::VectorXd>& received_words,
                          const rff::FourierFeatureMap& map, double ridge,
                          std::optional<double> lambda = std::nullopt);

// Omega^T phi(y).
Eigen::VectorXd detector_apply(const RkhsDetector& det, const Eigen::VectorXd& y);

struct RkhsDecodeResult {
    std::vector<std::uint8_t> hard_bits;
    int outer_iterations_used = 0;
    bool converged = false;
};

struct DecodeTraceRow {
    int word = 0;
    int outer_iter = 0;
    int inner_iters = 0;
    int syndrome_weight = 0;
};

struct RkhsOptions {
    int max_outer = 5;   // MAXITER
    int max_inner = 50;
    double ridge = 0.01;
    std::optional<double> lambda;  // DD-RFF damping; absent = classical RFF
    std::vector<DecodeTraceRow>* trace = nullptr;  // optional per-pass log
};

// CSV: `outer_iter,inner_iters,syndrome_weight` (word column prepended).
void write_decoder_trace_csv(const std::vector<DecodeTraceRow>& rows, std::ostream& os);

// Outer-loop decoder: initialize m_c = -2 y / sigma_n^2, run sum-product;
// while unconverged, refit the detector on the batch's current regressors,
// add -2 Omega^T phi(y) / sigma_hat^2 to the channel LLRs, replace the
// regressors by the detector outputs, and re-run. Words exit at the first
// zero-syndrome decision. A non-finite or nonpositive variance estimate
// aborts the outer loop and the best decision so far is kept.
std::vector<RkhsDecodeResult> rkhs_mp_decode_batch(const std::vector<Eigen::VectorXd>& received,
                                                   const ParityCheckSystem& sys,
                                                   double sigma_n_sq,
                                                   const rff::FourierFeatureMap& map,
                                                   const RkhsOptions& opts);

// Single-word interface; batch_context must contain y (the detector fit
// needs the whole Monte-Carlo batch). Decodes the batch and returns the
// entry matching y.
RkhsDecodeResult rkhs_mp_decode(const Eigen::VectorXd& y, const ParityCheckSystem& sys,
                                double sigma_n_sq, const rff::FourierFeatureMap& map,
                                int max_outer, int max_inner,
                                const std::vector<Eigen::VectorXd>& batch_context,
                                double ridge = 0.01,
                                std::optional<double> lambda = std::nullopt);

}  // namespace rffsim::ldpc
