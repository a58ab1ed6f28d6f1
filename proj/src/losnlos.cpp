#include "rffsim/losnlos.hpp"

#include <cmath>
#include <ostream>

#include "rffsim/csv.hpp"
#include "rffsim/errors.hpp"
#include "rffsim/rng.hpp"

namespace rffsim::losnlos {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

MobilityTrace random_walk(const Eigen::Vector2d& start, int steps, double step_size,
                          std::uint64_t seed) {
    if (steps < 1) throw ParameterError("random_walk: steps must be >= 1");
    if (!(step_size > 0.0)) throw ParameterError("random_walk: step_size must be positive");

    Rng rng(seed);
    MobilityTrace trace;
    trace.step_size = step_size;
    trace.positions.reserve(static_cast<std::size_t>(steps) + 1);
    trace.positions.push_back(start);
    Eigen::Vector2d pos = start;
    for (int t = 0; t < steps; ++t) {
        const double angle = rng.uniform(0.0, kTwoPi);
        pos += step_size * Eigen::Vector2d(std::cos(angle), std::sin(angle));
        trace.positions.push_back(pos);
    }
    return trace;
}

double los_probability(double distance, Scenario scenario) {
    if (!(distance > 0.0)) throw ParameterError("los_probability: distance must be positive");
    const double d0 = scenario == Scenario::C1 ? 200.0 : 500.0;
    return std::exp(-distance / d0);
}

LabeledChannelSequence generate_sequence(const MobilityTrace& trace, Scenario scenario,
                                         int n_sc, double rician_k, int coherence,
                                         std::uint64_t seed, const GenerationOptions& opts) {
    if (trace.positions.empty()) throw ParameterError("generate_sequence: empty trace");
    if (n_sc < 1) throw ParameterError("generate_sequence: n_sc must be >= 1");
    if (!(rician_k > 0.0)) throw ParameterError("generate_sequence: rician_k must be positive");
    if (coherence < 1) throw ParameterError("generate_sequence: coherence must be >= 1");

    Rng rng(seed);
    const auto steps = static_cast<Eigen::Index>(trace.positions.size());

    LabeledChannelSequence seq;
    seq.scenario = scenario;
    seq.features.resize(steps, 2 * n_sc);
    seq.labels.resize(static_cast<std::size_t>(steps));

    int state = 0;
    for (Eigen::Index t = 0; t < steps; ++t) {
        const double distance =
            std::max((trace.positions[static_cast<std::size_t>(t)] - trace.base_station).norm(),
                     opts.min_distance);
        if (t % coherence == 0) {
            const double p_los = los_probability(distance, scenario);
            state = rng.uniform() < p_los ? 0 : 1;  // 1 = NLOS
        }
        seq.labels[static_cast<std::size_t>(t)] = state;

        if (state == 0) {
            // Rician: deterministic specular ramp plus CN diffuse part, total
            // mean power (d/d_ref)^-los_exponent.
            const double amp =
                std::pow(distance / opts.reference_distance, -0.5 * opts.los_path_exponent);
            const double spec_amp = amp * std::sqrt(rician_k / (rician_k + 1.0));
            const double diff_std = amp / std::sqrt(2.0 * (rician_k + 1.0));
            for (int k = 0; k < n_sc; ++k) {
                const double phase =
                    kTwoPi * distance * static_cast<double>(k + 1) /
                    (opts.phase_slope_distance * static_cast<double>(n_sc));
                const double re = spec_amp * std::cos(phase) + diff_std * rng.gaussian();
                const double im = spec_amp * std::sin(phase) + diff_std * rng.gaussian();
                seq.features(t, k) = re;
                seq.features(t, n_sc + k) = im;
            }
        } else {
            // Rayleigh: zero-mean CN with mean power (d/d_ref)^-nlos_exponent.
            const double amp =
                std::pow(distance / opts.reference_distance, -0.5 * opts.nlos_path_exponent);
            const double comp_std = amp / std::sqrt(2.0);
            for (int k = 0; k < n_sc; ++k) {
                seq.features(t, k) = comp_std * rng.gaussian();
                seq.features(t, n_sc + k) = comp_std * rng.gaussian();
            }
        }
    }
    return seq;
}

void write_sequence_csv(const LabeledChannelSequence& seq, std::ostream& os) {
    const int n_sc = static_cast<int>(seq.features.cols()) / 2;
    os << "t,label";
    for (int k = 1; k <= n_sc; ++k) os << ",re_" << k;
    for (int k = 1; k <= n_sc; ++k) os << ",im_" << k;
    os << "\n";
    for (Eigen::Index t = 0; t < seq.features.rows(); ++t) {
        os << t << ',' << seq.labels[static_cast<std::size_t>(t)];
        for (Eigen::Index c = 0; c < seq.features.cols(); ++c) {
            os << ',' << sim::format_double(seq.features(t, c));
        }
        os << "\n";
    }
}

}  // namespace rffsim::losnlos
