#include "rffsim/fourier_features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "rffsim/binio.hpp"
#include "rffsim/errors.hpp"
#include "rffsim/rng.hpp"

namespace rffsim::rff {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FourierFeatureMap sample_feature_map(int n_input, int n_features, double sigma,
                                     std::uint64_t seed) {
    if (n_input < 1) throw ParameterError("sample_feature_map: n_input must be >= 1");
    if (n_features < 1) throw ParameterError("sample_feature_map: n_features must be >= 1");
    if (!(sigma > 0.0)) throw ParameterError("sample_feature_map: sigma must be positive");

    Rng rng(seed);
    FourierFeatureMap map;
    map.sigma = sigma;
    map.omegas.resize(n_features, n_input);
    map.biases.resize(n_features);
    const double omega_std = 1.0 / sigma;
    for (int i = 0; i < n_features; ++i) {
        for (int j = 0; j < n_input; ++j) {
            map.omegas(i, j) = rng.gaussian(0.0, omega_std);
        }
        map.biases(i) = rng.uniform(0.0, kTwoPi);
    }
    return map;
}

Eigen::VectorXd rff_transform(const FourierFeatureMap& map, const Eigen::VectorXd& x) {
    if (x.size() != map.n_input()) {
        throw ParameterError("rff_transform: input length does not match map");
    }
    if (!x.allFinite()) throw ParameterError("rff_transform: input must be finite");
    const double scale = std::sqrt(2.0 / static_cast<double>(map.n_features()));
    return (scale * ((map.omegas * x + map.biases).array().cos())).matrix();
}

Eigen::MatrixXd rff_transform_batch(const FourierFeatureMap& map, const Eigen::MatrixXd& xs) {
    if (xs.cols() != map.n_input()) {
        throw ParameterError("rff_transform_batch: input width does not match map");
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(map.n_features()));
    Eigen::MatrixXd z = xs * map.omegas.transpose();
    z.rowwise() += map.biases.transpose();
    return scale * z.array().cos();
}

Eigen::VectorXd damping_vector(const FourierFeatureMap& map, double lambda) {
    if (!(lambda > 0.0)) throw ParameterError("damping_vector: lambda must be positive");
    return (-0.5 * lambda * lambda * map.omegas.rowwise().squaredNorm().array()).exp();
}

Eigen::VectorXd ddrff_transform(const FourierFeatureMap& map, double lambda,
                                const Eigen::VectorXd& x) {
    return damping_vector(map, lambda).cwiseProduct(rff_transform(map, x));
}

Eigen::MatrixXd ddrff_transform_batch(const FourierFeatureMap& map, double lambda,
                                      const Eigen::MatrixXd& xs) {
    const Eigen::VectorXd d = damping_vector(map, lambda);
    Eigen::MatrixXd z = rff_transform_batch(map, xs);
    z.array().rowwise() *= d.transpose().array();
    return z;
}

double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma) {
    if (a.size() != b.size()) throw ParameterError("gaussian_kernel: length mismatch");
    if (!(sigma > 0.0)) throw ParameterError("gaussian_kernel: sigma must be positive");
    return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

double smoothed_gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                double sigma, double lambda) {
    if (a.size() != b.size()) throw ParameterError("smoothed_gaussian_kernel: length mismatch");
    if (!(sigma > 0.0) || !(lambda > 0.0)) {
        throw ParameterError("smoothed_gaussian_kernel: widths must be positive");
    }
    const double s2 = sigma * sigma;
    const double w2 = s2 + 2.0 * lambda * lambda;
    const double n = static_cast<double>(a.size());
    return std::pow(s2 / w2, 0.5 * n) * std::exp(-(a - b).squaredNorm() / (2.0 * w2));
}

double silverman_bandwidth(const std::vector<Eigen::VectorXd>& samples) {
    if (samples.size() < 2) {
        throw DataError("silverman_bandwidth: need at least 2 samples");
    }
    const Eigen::Index n = samples.front().size();
    const double count = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        if (s.size() != n) throw ParameterError("silverman_bandwidth: ragged samples");
        if (!s.allFinite()) throw ParameterError("silverman_bandwidth: non-finite sample");
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& s : samples) mean += s;
    mean /= count;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
    for (const auto& s : samples) var += (s - mean).cwiseAbs2();
    var /= (count - 1.0);

    const double sigma_hat = var.cwiseSqrt().mean();
    if (!(sigma_hat > 0.0)) {
        throw DataError("silverman_bandwidth: zero sample variance");
    }
    const double nd = static_cast<double>(n);
    return sigma_hat * std::pow(4.0 / ((nd + 2.0) * count), 1.0 / (nd + 4.0));
}

double silverman_bandwidth(const Eigen::MatrixXd& samples_rows) {
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(static_cast<std::size_t>(samples_rows.rows()));
    for (Eigen::Index r = 0; r < samples_rows.rows(); ++r) {
        samples.push_back(samples_rows.row(r).transpose());
    }
    return silverman_bandwidth(samples);
}

double median_heuristic_sigma(const Eigen::MatrixXd& samples_rows, int max_points) {
    const Eigen::Index n = samples_rows.rows();
    if (n < 2) throw DataError("median_heuristic_sigma: need at least 2 samples");
    if (max_points < 2) throw ParameterError("median_heuristic_sigma: max_points must be >= 2");

    std::vector<Eigen::Index> idx;
    const Eigen::Index take = std::min<Eigen::Index>(n, max_points);
    idx.reserve(static_cast<std::size_t>(take));
    for (Eigen::Index k = 0; k < take; ++k) idx.push_back(k * n / take);

    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(take) * (take - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            d2.push_back((samples_rows.row(idx[a]) - samples_rows.row(idx[b])).squaredNorm());
        }
    }
    std::nth_element(d2.begin(), d2.begin() + d2.size() / 2, d2.end());
    const double med = d2[d2.size() / 2];
    if (!(med > 0.0)) throw DataError("median_heuristic_sigma: degenerate sample spread");
    return std::sqrt(med / 2.0);
}

SmoothingState make_smoothing_state(Eigen::Index n_features, double lambda, double nu,
                                    int batch_size) {
    if (n_features < 1) throw ParameterError("make_smoothing_state: n_features must be >= 1");
    if (!(lambda > 0.0)) throw ParameterError("make_smoothing_state: lambda must be positive");
    if (nu < 0.0 || nu > 1.0) throw ParameterError("make_smoothing_state: nu must be in [0,1]");
    if (batch_size < 1) throw ParameterError("make_smoothing_state: batch_size must be >= 1");
    SmoothingState st;
    st.lambda = lambda;
    st.nu = nu;
    st.batch_index = 1;
    st.batch_size = batch_size;
    st.s_accum = Eigen::VectorXd::Zero(n_features);
    st.mu = Eigen::VectorXd::Zero(n_features);
    return st;
}

SmoothingState update_smoothed_mean(const SmoothingState& state, const FourierFeatureMap& map,
                                    const std::vector<Eigen::VectorXd>& batch) {
    if (batch.empty()) throw ParameterError("update_smoothed_mean: empty batch");
    if (static_cast<int>(batch.size()) != state.batch_size) {
        throw ParameterError("update_smoothed_mean: batch size does not match state");
    }
    if (state.s_accum.size() != map.n_features()) {
        throw ParameterError("update_smoothed_mean: state does not match map");
    }

    Eigen::VectorXd cos_sum = Eigen::VectorXd::Zero(map.n_features());
    for (const auto& x : batch) {
        if (x.size() != map.n_input()) {
            throw ParameterError("update_smoothed_mean: sample length does not match map");
        }
        cos_sum += (map.omegas * x + map.biases).array().cos().matrix();
    }

    const double i = static_cast<double>(state.batch_index);
    const double prefactor =
        std::sqrt(kTwoPi * state.lambda * state.lambda) / static_cast<double>(state.batch_size);
    const Eigen::VectorXd damp = damping_vector(map, state.lambda);

    SmoothingState next = state;
    next.s_accum = ((i - 1.0) / i) * state.s_accum +
                   (1.0 / i) * prefactor * damp.cwiseProduct(cos_sum);
    next.mu = state.nu * state.mu + next.s_accum;
    next.batch_index = state.batch_index + 1;
    return next;
}

KernelErrorReport kernel_approx_error(const FourierFeatureMap& map,
                                      std::optional<double> lambda,
                                      const std::vector<VectorPair>& pairs) {
    if (pairs.empty()) throw ParameterError("kernel_approx_error: empty pair list");

    Eigen::VectorXd damp;
    if (lambda) damp = damping_vector(map, *lambda);

    KernelErrorReport rep;
    rep.n_features = map.n_features();
    rep.n_pairs = pairs.size();
    double sum_abs = 0.0, sum_sq = 0.0, max_abs = 0.0;
    for (const auto& [a, b] : pairs) {
        Eigen::VectorXd fa = rff_transform(map, a);
        Eigen::VectorXd fb = rff_transform(map, b);
        double est, target;
        if (lambda) {
            est = damp.cwiseProduct(fa).dot(damp.cwiseProduct(fb));
            target = smoothed_gaussian_kernel(a, b, map.sigma, *lambda);
        } else {
            est = fa.dot(fb);
            target = gaussian_kernel(a, b, map.sigma);
        }
        const double dev = est - target;
        sum_abs += std::abs(dev);
        sum_sq += dev * dev;
        max_abs = std::max(max_abs, std::abs(dev));
    }
    const double n = static_cast<double>(pairs.size());
    rep.mean_abs_error = sum_abs / n;
    rep.max_abs_error = max_abs;
    rep.variance_of_estimate = sum_sq / n;
    return rep;
}

void save_feature_map(const FourierFeatureMap& map, std::ostream& os) {
    write_u64_le(os, static_cast<std::uint64_t>(map.n_input()));
    write_u64_le(os, static_cast<std::uint64_t>(map.n_features()));
    write_f64_le(os, map.sigma);
    for (Eigen::Index i = 0; i < map.n_features(); ++i) {
        for (Eigen::Index j = 0; j < map.n_input(); ++j) {
            write_f64_le(os, map.omegas(i, j));
        }
    }
    for (Eigen::Index i = 0; i < map.n_features(); ++i) {
        write_f64_le(os, map.biases(i));
    }
}

FourierFeatureMap load_feature_map(std::istream& is) {
    const auto n_input = static_cast<Eigen::Index>(read_u64_le(is));
    const auto n_features = static_cast<Eigen::Index>(read_u64_le(is));
    const double sigma = read_f64_le(is);
    if (n_input < 1 || n_features < 1 || !(sigma > 0.0)) {
        throw DataError("load_feature_map: corrupt header");
    }
    FourierFeatureMap map;
    map.sigma = sigma;
    map.omegas.resize(n_features, n_input);
    map.biases.resize(n_features);
    for (Eigen::Index i = 0; i < n_features; ++i) {
        for (Eigen::Index j = 0; j < n_input; ++j) {
            map.omegas(i, j) = read_f64_le(is);
        }
    }
    for (Eigen::Index i = 0; i < n_features; ++i) {
        map.biases(i) = read_f64_le(is);
    }
    return map;
}

}  // namespace rffsim::rff
