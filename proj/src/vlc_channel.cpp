#include "rffsim/vlc_channel.hpp"

#include <cmath>

#include "rffsim/errors.hpp"
#include "rffsim/rng.hpp"

namespace rffsim::vlc {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

void validate(const RappModel& model) {
    if (!(model.v_sat > 0.0)) throw ParameterError("RappModel: v_sat must be positive");
    if (!(model.knee > 0.0)) throw ParameterError("RappModel: knee must be positive");
    if (model.memory_alpha < 0.0 || model.memory_alpha >= 1.0) {
        throw ParameterError("RappModel: memory_alpha must be in [0, 1)");
    }
}
}  // namespace

double rapp(const RappModel& model, double v) {
    validate(model);
    if (!std::isfinite(v)) throw ParameterError("rapp: input must be finite");
    if (v == 0.0) return 0.0;
    const double p2 = 2.0 * model.knee;
    return v / std::pow(1.0 + std::pow(std::abs(v) / model.v_sat, p2), 1.0 / p2);
}

double lambertian_gain(const LinkGeometry& geom) {
    if (!(geom.distance > 0.0)) throw ParameterError("lambertian_gain: distance must be positive");
    if (!(geom.lambertian_order > 0.0)) {
        throw ParameterError("lambertian_gain: lambertian_order must be positive");
    }
    if (!(geom.detector_area > 0.0)) {
        throw ParameterError("lambertian_gain: detector_area must be positive");
    }
    if (geom.incidence_angle > geom.field_of_view) return 0.0;
    const double m = geom.lambertian_order;
    return (m + 1.0) / (2.0 * kPi * geom.distance * geom.distance) * geom.detector_area *
           std::pow(std::cos(geom.irradiance_angle), m) * std::cos(geom.incidence_angle);
}

Eigen::VectorXd transmit(const std::vector<std::uint8_t>& codeword_bits, const RappModel& model,
                         double h, double sigma_n, std::uint64_t seed,
                         const TransmitOptions& opts) {
    validate(model);
    if (!(h > 0.0)) throw ParameterError("transmit: channel gain must be positive");
    if (sigma_n < 0.0) throw ParameterError("transmit: sigma_n must be nonnegative");
    if (!(opts.input_backoff > 0.0)) throw ParameterError("transmit: input_backoff must be positive");

    Rng rng(seed);
    Eigen::VectorXd y(static_cast<Eigen::Index>(codeword_bits.size()));
    double prev = 0.0;
    for (std::size_t i = 0; i < codeword_bits.size(); ++i) {
        if (codeword_bits[i] > 1) throw ParameterError("transmit: bits must be 0 or 1");
        const double s = 2.0 * static_cast<double>(codeword_bits[i]) - 1.0;
        const double drive = opts.input_backoff * (s + model.memory_alpha * prev);
        double sample = h * rapp(model, drive);
        if (sigma_n > 0.0) sample += rng.gaussian(0.0, sigma_n);
        y(static_cast<Eigen::Index>(i)) = sample;
        prev = s;
    }
    return y;
}

double mean_square_rapp_output(const RappModel& model, double input_backoff) {
    const double hi = rapp(model, input_backoff * (1.0 + model.memory_alpha));
    const double lo = rapp(model, input_backoff * (1.0 - model.memory_alpha));
    return 0.5 * (hi * hi + lo * lo);
}

}  // namespace rffsim::vlc
