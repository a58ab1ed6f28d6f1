#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rffsim::vlc {

// AM-AM Rapp saturation model of the LED transfer characteristic with a
// single-tap memory term: drive v_i = x_i + memory_alpha * x_{i-1}.
struct RappModel {
    double v_sat = 0.4;        // saturation level
    double knee = 2.0;         // smoothness exponent p
    double memory_alpha = 0.2; // alpha in [0, 1)
};

// f(v) = v / (1 + (|v|/v_sat)^(2p))^(1/(2p)); odd, monotone, |f| <= v_sat.
double rapp(const RappModel& model, double v);

// Line-of-sight optical link geometry for the Lambertian DC gain.
struct LinkGeometry {
    double lambertian_order = 1.0;  // m
    double distance = 1.0;          // meters
    double irradiance_angle = 0.0;  // phi, radians in [0, pi/2)
    double incidence_angle = 0.0;   // psi, radians in [0, pi/2)
    double detector_area = 1e-4;    // m^2
    double field_of_view = 1.0;     // radians in (0, pi/2]
};

// h = ((m+1)/(2 pi d^2)) A cos^m(phi) cos(psi) inside the field of view, 0 outside.
double lambertian_gain(const LinkGeometry& geom);

struct TransmitOptions {
    double input_backoff = 1.0;  // scales the drive before the nonlinearity
};

// Bipolar transmission of a codeword through the memory Rapp channel:
//   s_i = 2 b_i - 1,  y_i = h * f(backoff * (s_i + alpha s_{i-1})) + n_i,
// with s_0-predecessor taken as 0 and n_i i.i.d. N(0, sigma_n^2).
// sigma_n = 0 is allowed (noiseless test mode). Deterministic per seed.
Eigen::VectorXd transmit(const std::vector<std::uint8_t>& codeword_bits, const RappModel& model,
                         double h, double sigma_n, std::uint64_t seed,
                         const TransmitOptions& opts = {});

// Steady-state mean square of the noiseless nonlinearity output for
// equiprobable i.i.d. bits; used by the harness's electrical-SNR convention.
double mean_square_rapp_output(const RappModel& model, double input_backoff = 1.0);

}  // namespace rffsim::vlc
