#include "rffsim/rkhs_decoder.hpp"

#include <cmath>
#include <ostream>

#include "rffsim/errors.hpp"

namespace rffsim::ldpc {

namespace {

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& words) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(words.size()), words.front().size());
    for (std::size_t w = 0; w < words.size(); ++w) m.row(static_cast<Eigen::Index>(w)) = words[w];
    return m;
}

Eigen::MatrixXd sign_of(const Eigen::MatrixXd& m) {
    // sign(0) mapped to +1 so targets stay in {-1, +1}
    return (m.array() < 0.0).select(-Eigen::MatrixXd::Ones(m.rows(), m.cols()),
                                    Eigen::MatrixXd::Ones(m.rows(), m.cols()));
}

}  // namespace

RkhsDetector fit_detector(const std::vector<Eigen::VectorXd>& received_words,
                          const rff::FourierFeatureMap& map, double ridge,
                          std::optional<double> lambda) {
    if (received_words.empty()) throw ParameterError("fit_detector: empty batch");
    if (ridge < 0.0) throw ParameterError("fit_detector: ridge must be nonnegative");
    const Eigen::Index c = received_words.front().size();
    if (map.n_features() != c || map.n_input() != c) {
        throw ParameterError("fit_detector: map dimensions must equal the word length");
    }

    const Eigen::MatrixXd y = stack_rows(received_words);                 // W x C
    const Eigen::MatrixXd phi = lambda ? rff::ddrff_transform_batch(map, *lambda, y)
                                       : rff::rff_transform_batch(map, y);  // W x n_G
    const Eigen::MatrixXd targets = sign_of(y);                           // W x C

    // Dual form of the primal ridge problem: Omega = Phi^T (Phi Phi^T + r I)^-1 S.
    Eigen::MatrixXd gram = phi * phi.transpose();
    gram.diagonal().array() += ridge;
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success ||
        (ridge == 0.0 && solver.rcond() < 1e-14)) {
        throw NumericError("fit_detector: singular normal equations; use ridge > 0");
    }
    const Eigen::MatrixXd alpha = solver.solve(targets);  // W x C

    RkhsDetector det;
    det.omega = phi.transpose() * alpha;  // n_G x C
    det.map = map;
    det.lambda = lambda;
    det.ridge = ridge;

    const Eigen::MatrixXd outputs = phi * det.omega;  // W x C, fitted values
    const double mean = outputs.mean();
    const double var =
        (outputs.array() - mean).square().sum() / static_cast<double>(outputs.size());
    det.sigma_hat_sq = var;
    if (!(det.sigma_hat_sq > 0.0) || !std::isfinite(det.sigma_hat_sq)) {
        throw NumericError("fit_detector: degenerate output variance");
    }
    return det;
}

Eigen::VectorXd detector_apply(const RkhsDetector& det, const Eigen::VectorXd& y) {
    const Eigen::VectorXd phi = det.lambda ? rff::ddrff_transform(det.map, *det.lambda, y)
                                           : rff::rff_transform(det.map, y);
    return det.omega.transpose() * phi;
}

std::vector<RkhsDecodeResult> rkhs_mp_decode_batch(const std::vector<Eigen::VectorXd>& received,
                                                   const ParityCheckSystem& sys,
                                                   double sigma_n_sq,
                                                   const rff::FourierFeatureMap& map,
                                                   const RkhsOptions& opts) {
    if (received.empty()) throw ParameterError("rkhs_mp_decode_batch: empty batch");
    if (!(sigma_n_sq > 0.0)) {
        throw ParameterError("rkhs_mp_decode_batch: sigma_n_sq must be positive");
    }
    if (opts.max_outer < 1 || opts.max_inner < 1) {
        throw ParameterError("rkhs_mp_decode_batch: iteration limits must be >= 1");
    }
    const std::size_t n_words = received.size();
    for (const auto& y : received) {
        if (y.size() != sys.n_bits) {
            throw ParameterError("rkhs_mp_decode_batch: word length does not match code");
        }
    }

    std::vector<Eigen::VectorXd> channel_llrs(n_words);
    for (std::size_t w = 0; w < n_words; ++w) {
        channel_llrs[w] =
            (-2.0 * received[w] / sigma_n_sq).cwiseMax(-kLlrClip).cwiseMin(kLlrClip);
    }

    std::vector<Eigen::VectorXd> regressors = received;
    std::vector<RkhsDecodeResult> results(n_words);
    std::vector<bool> done(n_words, false);

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        bool all_done = true;
        for (std::size_t w = 0; w < n_words; ++w) {
            if (done[w]) continue;
            const DecodeResult inner = sum_product_decode(sys, channel_llrs[w], opts.max_inner);
            results[w].hard_bits = inner.hard_bits;
            results[w].outer_iterations_used = outer;
            if (opts.trace) {
                int weight = 0;
                for (auto e : syndrome(sys, inner.hard_bits)) weight += e;
                opts.trace->push_back(
                    {static_cast<int>(w), outer, inner.iterations_used, weight});
            }
            if (inner.converged) {
                results[w].converged = true;
                done[w] = true;
            } else {
                all_done = false;
            }
        }
        if (all_done || outer == opts.max_outer) break;

        RkhsDetector det;
        try {
            det = fit_detector(regressors, map, opts.ridge, opts.lambda);
        } catch (const NumericError&) {
            break;  // keep best-so-far decisions
        }

        const Eigen::MatrixXd phi =
            opts.lambda ? rff::ddrff_transform_batch(map, *opts.lambda, stack_rows(regressors))
                        : rff::rff_transform_batch(map, stack_rows(regressors));
        const Eigen::MatrixXd outputs = phi * det.omega;  // W x C
        if (!outputs.allFinite()) break;

        for (std::size_t w = 0; w < n_words; ++w) {
            if (done[w]) continue;
            const Eigen::VectorXd z = outputs.row(static_cast<Eigen::Index>(w)).transpose();
            channel_llrs[w] = (channel_llrs[w] - 2.0 * z / det.sigma_hat_sq)
                                  .cwiseMax(-kLlrClip)
                                  .cwiseMin(kLlrClip);
            regressors[w] = z;
        }
    }
    return results;
}

void write_decoder_trace_csv(const std::vector<DecodeTraceRow>& rows, std::ostream& os) {
    os << "word,outer_iter,inner_iters,syndrome_weight\n";
    for (const auto& r : rows) {
        os << r.word << ',' << r.outer_iter << ',' << r.inner_iters << ',' << r.syndrome_weight
           << "\n";
    }
}

RkhsDecodeResult rkhs_mp_decode(const Eigen::VectorXd& y, const ParityCheckSystem& sys,
                                double sigma_n_sq, const rff::FourierFeatureMap& map,
                                int max_outer, int max_inner,
                                const std::vector<Eigen::VectorXd>& batch_context,
                                double ridge, std::optional<double> lambda) {
    std::size_t index = batch_context.size();
    for (std::size_t w = 0; w < batch_context.size(); ++w) {
        if (batch_context[w].size() == y.size() && batch_context[w] == y) {
            index = w;
            break;
        }
    }
    if (index == batch_context.size()) {
        throw ParameterError("rkhs_mp_decode: batch_context must include y");
    }
    RkhsOptions opts;
    opts.max_outer = max_outer;
    opts.max_inner = max_inner;
    opts.ridge = ridge;
    opts.lambda = lambda;
    return rkhs_mp_decode_batch(batch_context, sys, sigma_n_sq, map, opts)[index];
}

}  // namespace rffsim::ldpc
