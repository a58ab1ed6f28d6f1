#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rffsim/errors.hpp"
#include "rffsim/fourier_features.hpp"
#include "rffsim/rng.hpp"

using namespace rffsim;
using namespace rffsim::rff;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Test-only quadrature oracle for E_omega[exp(-lambda^2 |w|^2) cos(w.(a-b))]
// with w ~ N(0, (1/sigma^2) I_2): tensor Simpson rule on a wide grid,
// independent of the closed form it validates.
double smoothed_kernel_quadrature_2d(const Eigen::Vector2d& delta, double sigma, double lambda) {
    const double v = 1.0 / (sigma * sigma);
    const double lim = 8.0 * std::sqrt(v);
    const int n = 800;  // even
    const double h = 2.0 * lim / n;
    auto weight = [&](int i) {
        if (i == 0 || i == n) return 1.0;
        return (i % 2 == 1) ? 4.0 : 2.0;
    };
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double wx = -lim + i * h;
        double inner = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double wy = -lim + j * h;
            const double w2 = wx * wx + wy * wy;
            const double pdf = std::exp(-w2 / (2.0 * v)) / (kTwoPi * v);
            inner += weight(j) * std::exp(-lambda * lambda * w2) *
                     std::cos(wx * delta.x() + wy * delta.y()) * pdf;
        }
        total += weight(i) * inner;
    }
    return total * h * h / 9.0;
}

FourierFeatureMap constant_map(int n_features, int n_input, double omega_value, double bias) {
    FourierFeatureMap map;
    map.sigma = 1.0;
    map.omegas = Eigen::MatrixXd::Constant(n_features, n_input, omega_value);
    map.biases = Eigen::VectorXd::Constant(n_features, bias);
    return map;
}

}  // namespace

TEST_CASE("sample_feature_map shapes and bias range") {
    const auto map = sample_feature_map(2, 200, 1.0, 7);
    CHECK(map.omegas.rows() == 200);
    CHECK(map.omegas.cols() == 2);
    CHECK(map.biases.size() == 200);
    for (Eigen::Index i = 0; i < map.biases.size(); ++i) {
        CHECK(map.biases(i) >= 0.0);
        CHECK(map.biases(i) < kTwoPi);
    }
}

TEST_CASE("sample_feature_map is deterministic per seed") {
    const auto a = sample_feature_map(1, 1, 1.0, 0);
    const auto b = sample_feature_map(1, 1, 1.0, 0);
    CHECK(a.omegas(0, 0) == b.omegas(0, 0));
    CHECK(a.biases(0) == b.biases(0));
    const auto c = sample_feature_map(1, 1, 1.0, 1);
    CHECK(a.omegas(0, 0) != c.omegas(0, 0));
}

TEST_CASE("sample_feature_map frequency variance matches 1/sigma^2") {
    const auto map = sample_feature_map(3, 100000, 2.0, 1);
    for (int j = 0; j < 3; ++j) {
        const double mean = map.omegas.col(j).mean();
        const double var =
            (map.omegas.col(j).array() - mean).square().sum() / (map.omegas.rows() - 1.0);
        CHECK(var == doctest::Approx(0.25).epsilon(0.02));
    }
}

TEST_CASE("sample_feature_map rejects bad arguments") {
    CHECK_THROWS_AS(sample_feature_map(0, 10, 1.0, 0), ParameterError);
    CHECK_THROWS_AS(sample_feature_map(2, 0, 1.0, 0), ParameterError);
    CHECK_THROWS_AS(sample_feature_map(2, 10, 0.0, 0), ParameterError);
    CHECK_THROWS_AS(sample_feature_map(2, 10, -1.0, 0), ParameterError);
}

TEST_CASE("rff_transform constant-map values") {
    const auto zeros = constant_map(8, 3, 0.0, 0.0);
    const Eigen::VectorXd x = Eigen::Vector3d(0.3, -2.0, 5.0);
    const Eigen::VectorXd out = rff_transform(zeros, x);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        CHECK(out(i) == doctest::Approx(0.5).epsilon(1e-15));
    }

    const auto quarter = constant_map(8, 3, 0.0, kTwoPi / 4.0);
    const Eigen::VectorXd out2 = rff_transform(quarter, x);
    for (Eigen::Index i = 0; i < out2.size(); ++i) {
        CHECK(out2(i) == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("rff_transform bounds and norm") {
    const auto map = sample_feature_map(4, 64, 0.7, 11);
    Rng rng(5);
    const double bound = std::sqrt(2.0 / 64.0);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd x(4);
        for (int j = 0; j < 4; ++j) x(j) = rng.gaussian(0.0, 3.0);
        const Eigen::VectorXd out = rff_transform(map, x);
        CHECK(out.cwiseAbs().maxCoeff() <= bound + 1e-15);
        CHECK(out.squaredNorm() <= 2.0 + 1e-12);
    }
}

TEST_CASE("rff_transform rejects dimension mismatch") {
    const auto map = sample_feature_map(3, 16, 1.0, 2);
    CHECK_THROWS_AS(rff_transform(map, Eigen::Vector2d(1.0, 2.0)), ParameterError);
}

TEST_CASE("rff inner products estimate the Gaussian kernel") {
    // Monte-Carlo oracle over 20 seeded maps at n_G = 10000, |a-b| = 1.
    const Eigen::VectorXd a = Eigen::Vector2d(0.25, -0.5);
    const Eigen::VectorXd b = Eigen::Vector2d(0.25 + std::sqrt(0.5), -0.5 + std::sqrt(0.5));
    double acc = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto map = sample_feature_map(2, 10000, 1.0, 100 + s);
        acc += rff_transform(map, a).dot(rff_transform(map, b));
    }
    acc /= 20.0;
    const double target = gaussian_kernel(a, b, 1.0);
    CHECK(target == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(std::abs(acc - target) < 0.01);
}

TEST_CASE("rff_transform_batch matches per-sample transform") {
    const auto map = sample_feature_map(3, 32, 1.3, 9);
    Eigen::MatrixXd xs(5, 3);
    Rng rng(77);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) xs(r, c) = rng.gaussian();
    }
    const Eigen::MatrixXd batch = rff_transform_batch(map, xs);
    for (int r = 0; r < 5; ++r) {
        const Eigen::VectorXd single = rff_transform(map, xs.row(r).transpose());
        CHECK((batch.row(r).transpose() - single).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("silverman_bandwidth direct evaluation and errors") {
    CHECK_THROWS_AS(silverman_bandwidth(std::vector<Eigen::VectorXd>{}), DataError);
    CHECK_THROWS_AS(
        silverman_bandwidth(std::vector<Eigen::VectorXd>{Eigen::VectorXd::Ones(2)}), DataError);

    // two identical points: zero variance
    std::vector<Eigen::VectorXd> same(2, Eigen::VectorXd::Constant(2, 1.5));
    CHECK_THROWS_AS(silverman_bandwidth(same), DataError);

    // n = 1, N = 100: lambda = sigma_hat * (4/300)^(1/5)
    Rng rng(42);
    std::vector<Eigen::VectorXd> samples;
    double mean = 0.0;
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd v(1);
        v(0) = rng.gaussian();
        mean += v(0);
        samples.push_back(v);
    }
    mean /= 100.0;
    double var = 0.0;
    for (const auto& v : samples) var += (v(0) - mean) * (v(0) - mean);
    var /= 99.0;
    const double sigma_hat = std::sqrt(var);
    const double lambda = silverman_bandwidth(samples);
    CHECK(lambda == doctest::Approx(sigma_hat * std::pow(4.0 / 300.0, 0.2)).epsilon(1e-12));
    CHECK(lambda / sigma_hat == doctest::Approx(0.4217).epsilon(1e-3));
}

TEST_CASE("silverman_bandwidth is homogeneous in scale") {
    Rng rng(3);
    std::vector<Eigen::VectorXd> samples, scaled;
    const double c = 3.7;
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd v(3);
        for (int j = 0; j < 3; ++j) v(j) = rng.gaussian(1.0, 2.0);
        samples.push_back(v);
        scaled.push_back(c * v);
    }
    CHECK(silverman_bandwidth(scaled) ==
          doctest::Approx(c * silverman_bandwidth(samples)).epsilon(1e-12));
}

TEST_CASE("ddrff_transform equals damped rff_transform") {
    const auto map = sample_feature_map(4, 128, 0.9, 21);
    Rng rng(8);
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x(j) = rng.gaussian();

    const double lambda = 0.6;
    const Eigen::VectorXd plain = rff_transform(map, x);
    const Eigen::VectorXd damped = ddrff_transform(map, lambda, x);
    const Eigen::VectorXd d = damping_vector(map, lambda);
    for (Eigen::Index i = 0; i < plain.size(); ++i) {
        CHECK(damped(i) == doctest::Approx(d(i) * plain(i)).epsilon(1e-15));
        CHECK(d(i) > 0.0);
        CHECK(d(i) <= 1.0);
    }
    CHECK(damped.norm() <= plain.norm() + 1e-15);
}

TEST_CASE("ddrff_transform limits") {
    const auto map = sample_feature_map(3, 64, 1.0, 33);
    Eigen::VectorXd x = Eigen::Vector3d(0.1, 0.2, -0.3);
    const Eigen::VectorXd tiny = ddrff_transform(map, 1e-12, x);
    const Eigen::VectorXd plain = rff_transform(map, x);
    CHECK((tiny - plain).cwiseAbs().maxCoeff() < 1e-9);

    const auto zeros = constant_map(16, 3, 0.0, 0.0);
    const Eigen::VectorXd out = ddrff_transform(zeros, 2.5, x);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        CHECK(out(i) == doctest::Approx(std::sqrt(2.0 / 16.0)).epsilon(1e-15));
    }

    CHECK_THROWS_AS(ddrff_transform(map, 0.0, x), ParameterError);
    CHECK_THROWS_AS(ddrff_transform(map, -1.0, x), ParameterError);
}

TEST_CASE("smoothed kernel closed form matches quadrature oracle") {
    struct Case {
        Eigen::Vector2d delta;
        double sigma, lambda;
    };
    const Case cases[] = {
        {{1.0, 0.0}, 1.0, 0.5},
        {{0.3, -0.7}, 1.0, 0.5},
        {{1.2, 0.4}, 2.0, 0.8},
        {{0.0, 0.0}, 1.0, 0.25},
    };
    for (const auto& c : cases) {
        const Eigen::VectorXd a = Eigen::Vector2d(0.4, -1.1);
        const Eigen::VectorXd b = a - Eigen::VectorXd(c.delta);
        const double closed = smoothed_gaussian_kernel(a, b, c.sigma, c.lambda);
        const double quad = smoothed_kernel_quadrature_2d(c.delta, c.sigma, c.lambda);
        CHECK(std::abs(closed - quad) < 1e-4);
    }
}

TEST_CASE("ddrff inner products estimate the smoothed kernel") {
    // n=2, sigma=1, lambda=0.5, n_G=20000
    const Eigen::VectorXd a = Eigen::Vector2d(0.2, 0.5);
    const Eigen::VectorXd b = Eigen::Vector2d(-0.4, 1.1);
    double acc = 0.0;
    const int n_maps = 10;
    for (int s = 0; s < n_maps; ++s) {
        const auto map = sample_feature_map(2, 20000, 1.0, 500 + s);
        acc += ddrff_transform(map, 0.5, a).dot(ddrff_transform(map, 0.5, b));
    }
    acc /= n_maps;
    const double target = smoothed_gaussian_kernel(a, b, 1.0, 0.5);
    // effective width^2 = sigma^2 + 2 lambda^2 = 1.5
    CHECK(target == doctest::Approx(std::pow(1.0 / 1.5, 1.0) *
                                    std::exp(-(a - b).squaredNorm() / 3.0))
                        .epsilon(1e-12));
    CHECK(std::abs(acc - target) < 0.01);
}

TEST_CASE("update_smoothed_mean direct substitution at i=1") {
    const auto zeros = constant_map(6, 2, 0.0, 0.0);
    auto st = make_smoothing_state(6, 1.0, 0.0, 1);
    const std::vector<Eigen::VectorXd> batch{Eigen::Vector2d(0.7, -0.2)};
    const auto next = update_smoothed_mean(st, zeros, batch);
    const double expect = std::sqrt(kTwoPi);
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(next.s_accum(i) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(next.mu(i) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(next.batch_index == 2);
    // inputs unmodified
    CHECK(st.batch_index == 1);
    CHECK(st.s_accum.isZero());
}

TEST_CASE("update_smoothed_mean fixed point under identical batches") {
    const auto map = sample_feature_map(2, 12, 1.0, 4);
    auto st = make_smoothing_state(12, 0.7, 0.0, 3);
    std::vector<Eigen::VectorXd> batch{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(-1.0, 0.5),
                                       Eigen::Vector2d(2.0, -0.3)};
    const auto once = update_smoothed_mean(st, map, batch);
    const auto twice = update_smoothed_mean(once, map, batch);
    CHECK((twice.s_accum - once.s_accum).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("update_smoothed_mean equals the mean of per-batch contributions") {
    const auto map = sample_feature_map(3, 10, 1.2, 6);
    const double lambda = 0.4;
    const int batches = 7, m = 4;
    auto st = make_smoothing_state(10, lambda, 0.0, m);

    Rng rng(99);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(10);
    const Eigen::VectorXd damp = damping_vector(map, lambda);
    const double pref = std::sqrt(kTwoPi * lambda * lambda) / m;
    for (int t = 0; t < batches; ++t) {
        std::vector<Eigen::VectorXd> batch;
        Eigen::VectorXd contrib = Eigen::VectorXd::Zero(10);
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd x(3);
            for (int k = 0; k < 3; ++k) x(k) = rng.gaussian();
            batch.push_back(x);
            contrib += (map.omegas * x + map.biases).array().cos().matrix();
        }
        expected += damp.cwiseProduct(pref * contrib);
        st = update_smoothed_mean(st, map, batch);
    }
    expected /= static_cast<double>(batches);
    CHECK((st.s_accum - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((st.mu - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_smoothed_mean converges to the Monte-Carlo expectation oracle") {
    const auto map = sample_feature_map(2, 8, 1.0, 13);
    const double lambda = 0.5;
    const int batches = 100, m = 50;

    auto st = make_smoothing_state(8, lambda, 0.0, m);
    Rng stream(2024);
    for (int t = 0; t < batches; ++t) {
        std::vector<Eigen::VectorXd> batch;
        for (int j = 0; j < m; ++j) {
            batch.push_back(Eigen::Vector2d(stream.gaussian(), stream.gaussian()));
        }
        st = update_smoothed_mean(st, map, batch);
    }

    // Brute-force expectation of the damped streaming feature over the same
    // input law, with its per-sample standard deviation.
    const Eigen::VectorXd damp = damping_vector(map, lambda);
    const double pref = std::sqrt(kTwoPi * lambda * lambda);
    Rng oracle_rng(777);
    const int oracle_n = 2000000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(8), sum_sq = Eigen::VectorXd::Zero(8);
    for (int k = 0; k < oracle_n; ++k) {
        const Eigen::Vector2d x(oracle_rng.gaussian(), oracle_rng.gaussian());
        const Eigen::VectorXd vals =
            pref * damp.cwiseProduct(((map.omegas * x + map.biases).array().cos()).matrix());
        sum += vals;
        sum_sq += vals.cwiseAbs2();
    }
    const Eigen::VectorXd mean = sum / oracle_n;
    for (Eigen::Index i = 0; i < 8; ++i) {
        const double var = sum_sq(i) / oracle_n - mean(i) * mean(i);
        const double se = std::sqrt(var / (batches * m));
        CHECK(std::abs(st.mu(i) - mean(i)) <= 3.0 * se);
    }
}

TEST_CASE("update_smoothed_mean rejects bad batches") {
    const auto map = sample_feature_map(2, 4, 1.0, 1);
    auto st = make_smoothing_state(4, 1.0, 0.0, 2);
    CHECK_THROWS_AS(update_smoothed_mean(st, map, {}), ParameterError);
    CHECK_THROWS_AS(update_smoothed_mean(st, map, {Eigen::Vector2d(0, 0)}), ParameterError);
}

TEST_CASE("gaussian_kernel basics") {
    const Eigen::VectorXd a = Eigen::Vector2d(1.0, -2.0);
    CHECK(gaussian_kernel(a, a, 0.8) == doctest::Approx(1.0).epsilon(1e-15));

    const Eigen::VectorXd b = a + Eigen::VectorXd(Eigen::Vector2d(2.0 * std::sqrt(2.0), 0.0));
    CHECK(gaussian_kernel(a, b, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(gaussian_kernel(a, b, 2.0) == doctest::Approx(gaussian_kernel(b, a, 2.0)));
    CHECK_THROWS_AS(gaussian_kernel(a, Eigen::VectorXd::Ones(3), 1.0), ParameterError);
}

TEST_CASE("kernel_approx_error single-pair definition") {
    const auto map = sample_feature_map(2, 40, 1.0, 3);
    const Eigen::VectorXd a = Eigen::Vector2d(0.4, 0.9);
    const auto rep = kernel_approx_error(map, std::nullopt, {{a, a}});
    const double norm_sq = rff_transform(map, a).squaredNorm();
    CHECK(rep.mean_abs_error == doctest::Approx(std::abs(norm_sq - 1.0)).epsilon(1e-12));
    CHECK(rep.max_abs_error == doctest::Approx(rep.mean_abs_error));
    CHECK(rep.n_pairs == 1);
}

TEST_CASE("kernel_approx_error mean <= max and errors shrink with n_G") {
    Rng rng(55);
    std::vector<VectorPair> pairs;
    for (int i = 0; i < 30; ++i) {
        pairs.emplace_back(Eigen::Vector2d(rng.gaussian(), rng.gaussian()),
                           Eigen::Vector2d(rng.gaussian(), rng.gaussian()));
    }
    int wins = 0;
    for (int s = 0; s < 100; ++s) {
        const auto small = sample_feature_map(2, 100, 1.0, 9000 + s);
        const auto large = sample_feature_map(2, 10000, 1.0, 9000 + s);
        const auto rs = kernel_approx_error(small, std::nullopt, pairs);
        const auto rl = kernel_approx_error(large, std::nullopt, pairs);
        CHECK(rs.mean_abs_error <= rs.max_abs_error + 1e-15);
        if (rl.mean_abs_error < rs.mean_abs_error) ++wins;
    }
    CHECK(wins >= 95);
}

TEST_CASE("ddrff reduces the estimator variance at small n_G") {
    Rng rng(66);
    std::vector<Eigen::VectorXd> points;
    for (int i = 0; i < 100; ++i) {
        points.push_back(Eigen::Vector2d(rng.gaussian(), rng.gaussian()));
    }
    std::vector<VectorPair> pairs;
    for (int i = 0; i + 1 < 100; i += 2) pairs.emplace_back(points[i], points[i + 1]);
    const double lambda = silverman_bandwidth(points);

    double var_rff = 0.0, var_dd = 0.0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        const auto map = sample_feature_map(2, 50, 1.0, 40000 + s);
        var_rff += kernel_approx_error(map, std::nullopt, pairs).variance_of_estimate;
        var_dd += kernel_approx_error(map, lambda, pairs).variance_of_estimate;
    }
    CHECK(var_dd / seeds < var_rff / seeds);
}

TEST_CASE("feature map serialization round-trips and uses the documented layout") {
    const auto map = sample_feature_map(3, 5, 1.7, 12345);
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    save_feature_map(map, ss);

    const std::string bytes = ss.str();
    CHECK(bytes.size() == 8 + 8 + 8 + (5 * 3 + 5) * 8);
    // header: n_input, n_features little-endian
    CHECK(static_cast<unsigned char>(bytes[0]) == 3);
    CHECK(static_cast<unsigned char>(bytes[1]) == 0);
    CHECK(static_cast<unsigned char>(bytes[8]) == 5);

    const auto back = load_feature_map(ss);
    CHECK(back.sigma == map.sigma);
    CHECK((back.omegas - map.omegas).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.biases - map.biases).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("median_heuristic_sigma is positive and scale-covariant") {
    Rng rng(31);
    Eigen::MatrixXd xs(50, 4);
    for (int r = 0; r < 50; ++r) {
        for (int c = 0; c < 4; ++c) xs(r, c) = rng.gaussian();
    }
    const double s1 = median_heuristic_sigma(xs);
    CHECK(s1 > 0.0);
    CHECK(median_heuristic_sigma(5.0 * xs) == doctest::Approx(5.0 * s1).epsilon(1e-12));
}
