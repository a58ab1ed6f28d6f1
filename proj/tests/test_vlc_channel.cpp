#include <doctest.h>

#include <cmath>

#include "rffsim/errors.hpp"
#include "rffsim/rng.hpp"
#include "rffsim/vlc_channel.hpp"

using namespace rffsim;
using namespace rffsim::vlc;

TEST_CASE("rapp basic shape") {
    RappModel m{0.4, 2.0, 0.0};
    CHECK(rapp(m, 0.0) == 0.0);

    // saturation limit
    CHECK(rapp(m, 1e9) == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(rapp(m, -1e9) == doctest::Approx(-0.4).epsilon(1e-9));

    // direct formula evaluation at the knee: 0.4 / 2^(1/4)
    CHECK(rapp(m, 0.4) == doctest::Approx(0.4 / std::pow(2.0, 0.25)).epsilon(1e-12));
    CHECK(rapp(m, 0.4) == doctest::Approx(0.33636).epsilon(1e-4));
}

TEST_CASE("rapp is odd, monotone, and compressive") {
    RappModel m{0.7, 3.0, 0.0};
    double prev = rapp(m, -5.0);
    for (double v = -4.9; v <= 5.0; v += 0.1) {
        const double f = rapp(m, v);
        CHECK(f >= prev - 1e-15);
        CHECK(std::abs(f) <= std::min(std::abs(v), m.v_sat) + 1e-15);
        CHECK(f == doctest::Approx(-rapp(m, -v)).epsilon(1e-12));
        prev = f;
    }
}

TEST_CASE("rapp validates the model") {
    CHECK_THROWS_AS(rapp(RappModel{0.0, 2.0, 0.0}, 1.0), ParameterError);
    CHECK_THROWS_AS(rapp(RappModel{0.4, 0.0, 0.0}, 1.0), ParameterError);
    CHECK_THROWS_AS(rapp(RappModel{0.4, 2.0, 1.0}, 1.0), ParameterError);
}

TEST_CASE("lambertian_gain values and properties") {
    LinkGeometry g;
    g.lambertian_order = 1.0;
    g.distance = 2.0;
    g.detector_area = 1e-4;
    g.field_of_view = 1.0;

    // m=1, phi=psi=0, A=1e-4, d=2 -> (2/(2 pi 4)) * 1e-4
    const double expect = 2.0 / (2.0 * 3.14159265358979323846 * 4.0) * 1e-4;
    CHECK(lambertian_gain(g) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(lambertian_gain(g) == doctest::Approx(7.9577e-6).epsilon(1e-4));

    // inverse square
    LinkGeometry far = g;
    far.distance = 4.0;
    CHECK(lambertian_gain(g) == doctest::Approx(4.0 * lambertian_gain(far)).epsilon(1e-12));

    // outside the field of view
    LinkGeometry out = g;
    out.incidence_angle = 1.2;
    CHECK(lambertian_gain(out) == 0.0);

    LinkGeometry bad = g;
    bad.distance = 0.0;
    CHECK_THROWS_AS(lambertian_gain(bad), ParameterError);
}

TEST_CASE("transmit is the bipolar map in the linear noiseless regime") {
    RappModel linear{1e9, 2.0, 0.0};
    const std::vector<std::uint8_t> bits{0, 1, 1, 0, 1};
    const Eigen::VectorXd y = transmit(bits, linear, 1.0, 0.0, 5);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        CHECK(y(static_cast<Eigen::Index>(i)) ==
              doctest::Approx(2.0 * bits[i] - 1.0).epsilon(1e-9));
    }
}

TEST_CASE("transmit memory depth is exactly one") {
    RappModel m{0.4, 2.0, 0.2};
    std::vector<std::uint8_t> bits(20, 0);
    bits[10] = 1;
    const Eigen::VectorXd base = transmit(bits, m, 1.0, 0.0, 9);

    // flipping bit i-2 leaves sample i unchanged; flipping i-1 or i changes it
    auto flipped = bits;
    flipped[8] = 1;
    const Eigen::VectorXd f8 = transmit(flipped, m, 1.0, 0.0, 9);
    CHECK(f8(10) == base(10));

    flipped = bits;
    flipped[9] = 1;
    const Eigen::VectorXd f9 = transmit(flipped, m, 1.0, 0.0, 9);
    CHECK(f9(10) != base(10));
    CHECK(f9(12) == base(12));
}

TEST_CASE("transmit saturates at h * v_sat and respects determinism") {
    RappModel m{0.4, 2.0, 0.2};
    Rng rng(3);
    std::vector<std::uint8_t> bits(500);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform() < 0.5);

    const double h = 2.5;
    const Eigen::VectorXd clean = transmit(bits, m, h, 0.0, 17);
    CHECK(clean.cwiseAbs().maxCoeff() <= h * m.v_sat + 1e-12);

    const Eigen::VectorXd a = transmit(bits, m, h, 0.3, 17);
    const Eigen::VectorXd b = transmit(bits, m, h, 0.3, 17);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd c = transmit(bits, m, h, 0.3, 18);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("transmit noise is calibrated") {
    RappModel m{0.4, 2.0, 0.2};
    Rng rng(4);
    std::vector<std::uint8_t> bits(100000);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform() < 0.5);

    const double sigma = 0.35;
    const Eigen::VectorXd clean = transmit(bits, m, 1.0, 0.0, 77);
    const Eigen::VectorXd noisy = transmit(bits, m, 1.0, sigma, 77);
    const Eigen::VectorXd diff = noisy - clean;
    const double var = diff.squaredNorm() / diff.size();
    // 3 standard errors of the sample variance of a Gaussian
    const double se = sigma * sigma * std::sqrt(2.0 / diff.size());
    CHECK(std::abs(var - sigma * sigma) <= 3.0 * se);
}

TEST_CASE("mean_square_rapp_output matches a direct average") {
    RappModel m{0.4, 2.0, 0.2};
    const double hi = rapp(m, 1.2), lo = rapp(m, 0.8);
    CHECK(mean_square_rapp_output(m) == doctest::Approx(0.5 * (hi * hi + lo * lo)));

    // empirical check over a long random word
    Rng rng(8);
    std::vector<std::uint8_t> bits(200000);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform() < 0.5);
    const Eigen::VectorXd clean = transmit(bits, m, 1.0, 0.0, 6);
    const double emp = clean.squaredNorm() / clean.size();
    CHECK(emp == doctest::Approx(mean_square_rapp_output(m)).epsilon(0.01));
}

TEST_CASE("transmit validates inputs") {
    RappModel m{0.4, 2.0, 0.2};
    CHECK_THROWS_AS(transmit({0, 2, 1}, m, 1.0, 0.1, 1), ParameterError);
    CHECK_THROWS_AS(transmit({0, 1}, m, 0.0, 0.1, 1), ParameterError);
    CHECK_THROWS_AS(transmit({0, 1}, m, 1.0, -0.1, 1), ParameterError);
}
