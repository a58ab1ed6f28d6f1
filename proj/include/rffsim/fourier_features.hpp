#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace rffsim::rff {

// Frozen random Fourier feature map for the real Gaussian kernel
// k(a,b) = exp(-||a-b||^2 / (2 sigma^2)).
//
// phi(x)_i = sqrt(2/n_G) * cos(omega_i . x + b_i), with omega_i drawn i.i.d.
// N(0, (1/sigma^2) I) and b_i uniform on [0, 2pi). Immutable after sampling:
// the same map always produces the same output for the same input.
struct FourierFeatureMap {
    Eigen::MatrixXd omegas;  // n_features x n_input, row i = omega_i
    Eigen::VectorXd biases;  // n_features, each in [0, 2pi)
    double sigma = 1.0;

    Eigen::Index n_input() const { return omegas.cols(); }
    Eigen::Index n_features() const { return omegas.rows(); }
};

FourierFeatureMap sample_feature_map(int n_input, int n_features, double sigma,
                                     std::uint64_t seed);

// phi(x); every entry lies in [-sqrt(2/n_G), sqrt(2/n_G)].
Eigen::VectorXd rff_transform(const FourierFeatureMap& map, const Eigen::VectorXd& x);

// Row-wise transform of a batch (rows = samples).
Eigen::MatrixXd rff_transform_batch(const FourierFeatureMap& map, const Eigen::MatrixXd& xs);

// Per-component damping d_i = exp(-lambda^2 ||omega_i||^2 / 2) in (0, 1].
Eigen::VectorXd damping_vector(const FourierFeatureMap& map, double lambda);

// Distribution-dependent (Parzen-smoothed) feature map: the classical RFF
// damped elementwise by damping_vector(map, lambda). Inner products converge
// to the smoothed Gaussian kernel with effective width^2 = sigma^2 + 2 lambda^2.
Eigen::VectorXd ddrff_transform(const FourierFeatureMap& map, double lambda,
                                const Eigen::VectorXd& x);

Eigen::MatrixXd ddrff_transform_batch(const FourierFeatureMap& map, double lambda,
                                      const Eigen::MatrixXd& xs);

double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma);

// Closed-form target of the DD-RFF inner product:
// (sigma^2/(sigma^2+2 lambda^2))^(n/2) * exp(-||a-b||^2/(2 (sigma^2+2 lambda^2))).
double smoothed_gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                double sigma, double lambda);

// Kernel-density bandwidth lambda = sigma_hat * (4 / ((n+2) N))^(1/(n+4)),
// sigma_hat being the mean per-coordinate sample standard deviation.
double silverman_bandwidth(const std::vector<Eigen::VectorXd>& samples);
double silverman_bandwidth(const Eigen::MatrixXd& samples_rows);

// Median-heuristic kernel width: sigma^2 = median of pairwise squared
// distances / 2, over at most max_points rows (evenly strided subsample).
double median_heuristic_sigma(const Eigen::MatrixXd& samples_rows, int max_points = 200);

// Running Parzen/moving-average statistics for the distribution-dependent map.
struct SmoothingState {
    double lambda = 1.0;      // Parzen bandwidth
    Eigen::VectorXd s_accum;  // accumulator S, length n_G
    Eigen::VectorXd mu;       // smoothed mean, length n_G
    double nu = 0.0;          // forgetting factor in [0, 1]
    long batch_index = 1;     // i, starts at 1
    int batch_size = 1;       // M
};

SmoothingState make_smoothing_state(Eigen::Index n_features, double lambda, double nu,
                                    int batch_size);

// One moving-average step:
//   S_i := ((i-1)/i) S_i + (1/i) exp(-lambda^2 |omega_i|^2/2) (sqrt(2 pi lambda^2)/M)
//          * sum_j cos(omega_i . x_j + b_i)
//   mu  := nu * mu + S
// Returns the advanced state; inputs are not modified.
SmoothingState update_smoothed_mean(const SmoothingState& state, const FourierFeatureMap& map,
                                    const std::vector<Eigen::VectorXd>& batch);

struct KernelErrorReport {
    Eigen::Index n_features = 0;
    double mean_abs_error = 0.0;
    double max_abs_error = 0.0;
    double variance_of_estimate = 0.0;  // mean squared deviation from the target
    std::size_t n_pairs = 0;
};

using VectorPair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;

// Deviation statistics of feature inner products against the analytical
// target: the plain Gaussian kernel when lambda is absent, the smoothed
// closed form when lambda is set (DD-RFF).
KernelErrorReport kernel_approx_error(const FourierFeatureMap& map,
                                      std::optional<double> lambda,
                                      const std::vector<VectorPair>& pairs);

// Flat binary record: u64 n_input, u64 n_features, f64 sigma, then row-major
// omegas and biases as little-endian IEEE-754 doubles.
void save_feature_map(const FourierFeatureMap& map, std::ostream& os);
FourierFeatureMap load_feature_map(std::istream& is);

}  // namespace rffsim::rff
