#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rffsim::losnlos {

enum class Scenario { C1, D1 };  // urban / suburban

struct MobilityTrace {
    std::vector<Eigen::Vector2d> positions;          // meters
    Eigen::Vector2d base_station{50.0, 150.0};
    double step_size = 1.0;
};

// 2D random walk with uniformly random step directions; the trace has
// steps + 1 positions starting at `start`.
MobilityTrace random_walk(const Eigen::Vector2d& start, int steps, double step_size,
                          std::uint64_t seed);

// Simplified distance-dependent LOS probability p(d) = exp(-d/d0) with
// d0 = 200 m (C1, urban) and d0 = 500 m (D1, suburban).
double los_probability(double distance, Scenario scenario);

// Per-timestep channel-estimate features with ground-truth LOS/NLOS labels.
// Feature rows are [re_1..re_nsc, im_1..im_nsc]; label 1 = NLOS.
struct LabeledChannelSequence {
    Eigen::MatrixXd features;  // T x 2*n_sc
    std::vector<int> labels;   // T
    Scenario scenario = Scenario::C1;
};

struct GenerationOptions {
    double los_path_exponent = 2.0;
    double nlos_path_exponent = 3.5;
    double reference_distance = 10.0;  // meters; 0 dB reference power
    double min_distance = 1.0;         // clamp for the path-loss law
    double phase_slope_distance = 100.0;  // meters per 2*pi of specular phase ramp
};

// Walk the trace; every `coherence` steps redraw the LOS/NLOS state with
// probability los_probability(distance). LOS steps emit Rician per-subcarrier
// estimates (factor rician_k, linear), NLOS steps Rayleigh, both with
// distance-dependent mean power.
LabeledChannelSequence generate_sequence(const MobilityTrace& trace, Scenario scenario,
                                         int n_sc, double rician_k, int coherence,
                                         std::uint64_t seed,
                                         const GenerationOptions& opts = {});

// CSV rows: t,label,re_1,..,re_nsc,im_1,..,im_nsc
void write_sequence_csv(const LabeledChannelSequence& seq, std::ostream& os);

}  // namespace rffsim::losnlos
