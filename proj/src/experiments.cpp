#include "rffsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "rffsim/errors.hpp"
#include "rffsim/fourier_features.hpp"
#include "rffsim/ldpc.hpp"
#include "rffsim/losnlos.hpp"
#include "rffsim/lstm.hpp"
#include "rffsim/parallel.hpp"
#include "rffsim/rkhs_decoder.hpp"
#include "rffsim/rng.hpp"
#include "rffsim/vlc_channel.hpp"

namespace rffsim::sim {

namespace {

constexpr const char* kArtifactVersion = "rffsim 1.0.0";

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream os(path, std::ios::binary);  // binary keeps newlines byte-stable
    if (!os) throw NumericError("cannot open output file " + path.string());
    return os;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

std::vector<std::string> selected_variants(const ExperimentConfig& cfg) {
    const bool kernel = cfg.experiment == ExperimentKind::KernelBench;
    if (cfg.feature_variant == "all") {
        if (kernel) return {"rff", "ddrff"};
        return {"none", "rff", "ddrff"};
    }
    if (kernel && cfg.feature_variant == "none") {
        throw ConfigError({"kernel_bench has no 'none' variant"});
    }
    return {cfg.feature_variant};
}

void write_run_meta(const ExperimentConfig& cfg, const std::string& out_dir) {
    auto os = open_out(out_dir, "run.meta");
    os << "artifact = " << kArtifactVersion << "\n";
    os << "workers = deterministic (per-trial counter-split seeds)\n\n";
    os << describe_config(cfg);
}

// ---------------------------------------------------------------------------
// kernel-bench
// ---------------------------------------------------------------------------

std::vector<MetricRecord> run_kernel_bench(const ExperimentConfig& cfg,
                                           const std::string& out_dir) {
    const auto variants = selected_variants(cfg);

    // Evaluation points and pairs, shared by every variant and map seed.
    Rng point_rng(derive_seed(cfg.seed, 0xE0));
    std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(cfg.kb_n_eval_points));
    for (auto& p : points) {
        p.resize(cfg.kb_n_input);
        for (int j = 0; j < cfg.kb_n_input; ++j) p(j) = point_rng.gaussian();
    }
    std::vector<rff::VectorPair> pairs;
    pairs.reserve(static_cast<std::size_t>(cfg.kb_n_pairs));
    for (int i = 0; i < cfg.kb_n_pairs; ++i) {
        const auto a = static_cast<std::size_t>(2 * i) % points.size();
        const auto b = static_cast<std::size_t>(2 * i + 1) % points.size();
        pairs.emplace_back(points[a], points[b]);
    }

    const double lambda = cfg.kb_lambda_rule == "fixed"
                              ? cfg.kb_lambda_value
                              : rff::silverman_bandwidth(points);

    struct Cell {
        std::vector<MetricRecord> records;
    };
    const int n_cells = static_cast<int>(cfg.n_g_list.size()) * cfg.kb_n_seeds;
    std::vector<Cell> cells(static_cast<std::size_t>(n_cells));

    parallel_for_index(n_cells, [&](int cell) {
        const int gi = cell / cfg.kb_n_seeds;
        const int s = cell % cfg.kb_n_seeds;
        const int n_g = cfg.n_g_list[static_cast<std::size_t>(gi)];
        const std::uint64_t map_seed =
            derive_seed(cfg.seed, 0x100 + static_cast<std::uint64_t>(cell));
        const auto map = rff::sample_feature_map(cfg.kb_n_input, n_g, cfg.kb_sigma, map_seed);
        for (const auto& variant : variants) {
            const std::optional<double> lam =
                variant == "ddrff" ? std::optional<double>(lambda) : std::nullopt;
            const auto rep = rff::kernel_approx_error(map, lam, pairs);
            auto& out = cells[static_cast<std::size_t>(cell)].records;
            const auto x = static_cast<double>(n_g);
            const auto seed_id = static_cast<std::uint64_t>(s);
            out.push_back({"kernel_bench", variant, "n_g", x, "mean_abs_err",
                           rep.mean_abs_error, seed_id});
            out.push_back({"kernel_bench", variant, "n_g", x, "max_abs_err", rep.max_abs_error,
                           seed_id});
            out.push_back({"kernel_bench", variant, "n_g", x, "variance_of_estimate",
                           rep.variance_of_estimate, seed_id});
        }
    });

    std::vector<MetricRecord> records;
    for (const auto& c : cells) {
        records.insert(records.end(), c.records.begin(), c.records.end());
    }

    auto os = open_out(out_dir, "kernel_bench.csv");
    write_metrics_csv(os, records);
    write_run_meta(cfg, out_dir);
    return records;
}

// ---------------------------------------------------------------------------
// losnlos
// ---------------------------------------------------------------------------

namespace {

struct LosNlosTrial {
    std::vector<MetricRecord> records;
    // ROC rows at the configured ROC training size: variant -> points
    std::vector<std::pair<std::string, std::vector<lstm::RocPoint>>> rocs;
};

lstm::SequenceBatch single_sequence(const Eigen::MatrixXd& feats, const std::vector<int>& labels) {
    lstm::SequenceBatch b;
    b.features.push_back(feats);
    b.labels.push_back(labels);
    return b;
}

LosNlosTrial losnlos_trial(const ExperimentConfig& cfg, int trial,
                           const std::vector<std::string>& variants) {
    using losnlos::Scenario;
    const Scenario scen = cfg.ln_scenario == "C1" ? Scenario::C1 : Scenario::D1;
    const std::uint64_t base = cfg.seed;
    const auto t64 = static_cast<std::uint64_t>(trial);

    int max_train = cfg.ln_roc_train_size;
    for (int ts : cfg.train_sizes) max_train = std::max(max_train, ts);

    auto make_sequence = [&](double x, double y, int length, std::uint64_t walk_seed,
                             std::uint64_t chan_seed) {
        auto trace = losnlos::random_walk({x, y}, length - 1, cfg.ln_step_size, walk_seed);
        trace.base_station = {cfg.ln_base_x, cfg.ln_base_y};
        const double k_lin = db_to_linear(cfg.ln_rician_k_db);
        return losnlos::generate_sequence(trace, scen, cfg.ln_n_subcarriers, k_lin,
                                          cfg.ln_coherence, chan_seed);
    };

    const auto train_seq = make_sequence(cfg.ln_train_x, cfg.ln_train_y, max_train,
                                         derive_seed(base, t64 * 8 + 1),
                                         derive_seed(base, t64 * 8 + 2));
    const auto test_seq = make_sequence(cfg.ln_test_x, cfg.ln_test_y, cfg.ln_test_length,
                                        derive_seed(base, t64 * 8 + 3),
                                        derive_seed(base, t64 * 8 + 4));
    const std::uint64_t map_seed = derive_seed(base, t64 * 8 + 5);
    const std::uint64_t init_seed = derive_seed(base, t64 * 8 + 6);

    LosNlosTrial out;
    for (int train_size : cfg.train_sizes) {
        const Eigen::MatrixXd train_feats = train_seq.features.topRows(train_size);
        const std::vector<int> train_labels(train_seq.labels.begin(),
                                            train_seq.labels.begin() + train_size);

        for (const auto& variant : variants) {
            Eigen::MatrixXd ftr, fte;
            if (variant == "none") {
                ftr = train_feats;
                fte = test_seq.features;
            } else {
                const double sigma = rff::median_heuristic_sigma(train_feats);
                const auto map = rff::sample_feature_map(2 * cfg.ln_n_subcarriers,
                                                         cfg.ln_n_features, sigma, map_seed);
                if (variant == "ddrff") {
                    const double lam = rff::silverman_bandwidth(train_feats);
                    ftr = rff::ddrff_transform_batch(map, lam, train_feats);
                    fte = rff::ddrff_transform_batch(map, lam, test_seq.features);
                } else {
                    ftr = rff::rff_transform_batch(map, train_feats);
                    fte = rff::rff_transform_batch(map, test_seq.features);
                }
            }
            if (cfg.ln_extra_stage == "true") {
                const double sigma2 = rff::median_heuristic_sigma(ftr);
                const auto stage = lstm::make_feature_cascade(
                    static_cast<int>(ftr.cols()), cfg.ln_extra_stage_width, cfg.ln_n_features,
                    sigma2, derive_seed(base, t64 * 8 + 7));
                ftr = lstm::apply_cascade(stage, ftr);
                fte = lstm::apply_cascade(stage, fte);
            }

            lstm::TrainOptions topts;
            topts.learning_rate = cfg.ln_learning_rate;
            topts.epochs = cfg.ln_epochs;
            topts.gradient_clip = cfg.ln_gradient_clip;
            topts.seed = init_seed;

            auto params = lstm::init_parameters(static_cast<int>(ftr.cols()), cfg.ln_n_hidden,
                                                init_seed);
            const auto x = static_cast<double>(train_size);
            const auto seed_id = static_cast<std::uint64_t>(trial);
            try {
                params = lstm::train(params, single_sequence(ftr, train_labels), topts);
            } catch (const TrainingDivergenceError&) {
                out.records.push_back(
                    {"losnlos", variant, "train_size", x, "diverged", 1.0, seed_id});
                continue;
            }

            const auto rep =
                lstm::evaluate(params, single_sequence(fte, test_seq.labels));
            if (rep.f1) {
                out.records.push_back(
                    {"losnlos", variant, "train_size", x, "f1", *rep.f1, seed_id});
            } else {
                out.records.push_back(
                    {"losnlos", variant, "train_size", x, "degenerate_labels", 1.0, seed_id});
            }
            out.records.push_back(
                {"losnlos", variant, "train_size", x, "accuracy", rep.accuracy, seed_id});
            if (train_size == cfg.ln_roc_train_size) {
                out.rocs.emplace_back(variant, rep.roc);
            }
        }
    }
    return out;
}

}  // namespace

std::vector<MetricRecord> run_losnlos(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto variants = selected_variants(cfg);
    std::vector<LosNlosTrial> trials(static_cast<std::size_t>(cfg.ln_n_seeds));
    parallel_for_index(cfg.ln_n_seeds,
                       [&](int t) { trials[static_cast<std::size_t>(t)] = losnlos_trial(cfg, t, variants); });

    std::vector<MetricRecord> records;
    for (const auto& tr : trials) {
        records.insert(records.end(), tr.records.begin(), tr.records.end());
    }
    auto os = open_out(out_dir, "losnlos_f1.csv");
    write_metrics_csv(os, records);

    auto roc_os = open_out(out_dir, "losnlos_roc.csv");
    roc_os << "variant,seed,threshold,fpr,tpr\n";
    for (std::size_t t = 0; t < trials.size(); ++t) {
        for (const auto& [variant, roc] : trials[t].rocs) {
            for (const auto& pt : roc) {
                roc_os << variant << ',' << t << ',' << format_double(pt.threshold) << ','
                       << format_double(pt.fpr) << ',' << format_double(pt.tpr) << "\n";
            }
        }
    }
    write_run_meta(cfg, out_dir);
    return records;
}

// ---------------------------------------------------------------------------
// ldpc-ber
// ---------------------------------------------------------------------------

namespace {

struct BerCell {
    std::vector<MetricRecord> records;
};

BerCell ldpc_trial(const ExperimentConfig& cfg, const ldpc::ParityCheckSystem& sys, int trial,
                   const std::vector<std::string>& variants) {
    const int n_words = (cfg.lb_n_info_bits + 323) / 324;
    const auto t64 = static_cast<std::uint64_t>(trial);

    vlc::RappModel model;
    model.v_sat = cfg.lb_v_sat;
    model.knee = cfg.lb_rapp_knee;
    model.memory_alpha = cfg.lb_alpha;
    vlc::TransmitOptions topts;
    topts.input_backoff = cfg.lb_input_backoff;

    BerCell cell;
    for (std::size_t point = 0; point < cfg.snr_db_list.size(); ++point) {
        const double snr_db = cfg.snr_db_list[point];
        const double snr = db_to_linear(snr_db);
        double sigma_n_sq;
        if (cfg.lb_channel == "rapp") {
            // electrical SNR convention: snr = h * E[f(s)^2] / sigma_n^2
            sigma_n_sq = cfg.lb_h_gain *
                         vlc::mean_square_rapp_output(model, cfg.lb_input_backoff) / snr;
        } else {
            // Eb/N0 for unit-energy bipolar symbols at rate 1/2
            sigma_n_sq = 1.0 / (2.0 * 0.5 * snr);
        }
        const double sigma_n = std::sqrt(sigma_n_sq);

        // Disjoint substreams: trial in the high bits, then the SNR point,
        // then the word index, then a data/noise/map tag.
        const std::uint64_t point_stream = (t64 << 40) | (static_cast<std::uint64_t>(point) << 24);

        std::vector<std::vector<std::uint8_t>> infos(static_cast<std::size_t>(n_words));
        std::vector<Eigen::VectorXd> received(static_cast<std::size_t>(n_words));
        for (int w = 0; w < n_words; ++w) {
            const std::uint64_t word_stream =
                point_stream | (static_cast<std::uint64_t>(w) << 2);
            Rng data_rng(derive_seed(cfg.seed, word_stream));
            auto& info = infos[static_cast<std::size_t>(w)];
            info.resize(324);
            for (auto& b : info) b = static_cast<std::uint8_t>(data_rng.uniform() < 0.5);
            const auto codeword = ldpc::encode(sys, info);
            const std::uint64_t noise_seed = derive_seed(cfg.seed, word_stream + 1);
            if (cfg.lb_channel == "rapp") {
                received[static_cast<std::size_t>(w)] =
                    vlc::transmit(codeword, model, cfg.lb_h_gain, sigma_n, noise_seed, topts);
            } else {
                Rng noise_rng(noise_seed);
                Eigen::VectorXd y(sys.n_bits);
                for (int k = 0; k < sys.n_bits; ++k) {
                    y(k) = 2.0 * codeword[static_cast<std::size_t>(k)] - 1.0 +
                           sigma_n * noise_rng.gaussian();
                }
                received[static_cast<std::size_t>(w)] = y;
            }
        }

        for (const auto& variant : variants) {
            long bit_errors = 0;
            if (variant == "none") {
                for (int w = 0; w < n_words; ++w) {
                    const Eigen::VectorXd llr =
                        (-2.0 * received[static_cast<std::size_t>(w)] / sigma_n_sq)
                            .cwiseMax(-ldpc::kLlrClip)
                            .cwiseMin(ldpc::kLlrClip);
                    const auto res = ldpc::sum_product_decode(sys, llr, cfg.lb_max_inner);
                    for (int k = 0; k < 324; ++k) {
                        bit_errors += res.hard_bits[static_cast<std::size_t>(k)] !=
                                      infos[static_cast<std::size_t>(w)][static_cast<std::size_t>(k)];
                    }
                }
            } else {
                Eigen::MatrixXd rows(n_words, sys.n_bits);
                for (int w = 0; w < n_words; ++w) {
                    rows.row(w) = received[static_cast<std::size_t>(w)];
                }
                const double det_sigma = rff::median_heuristic_sigma(rows);
                const auto map = rff::sample_feature_map(sys.n_bits, sys.n_bits, det_sigma,
                                                         derive_seed(cfg.seed, point_stream | 3));
                ldpc::RkhsOptions ropts;
                ropts.max_outer = cfg.lb_max_outer;
                ropts.max_inner = cfg.lb_max_inner;
                ropts.ridge = cfg.lb_ridge;
                if (variant == "ddrff") ropts.lambda = rff::silverman_bandwidth(rows);
                const auto results =
                    ldpc::rkhs_mp_decode_batch(received, sys, sigma_n_sq, map, ropts);
                for (int w = 0; w < n_words; ++w) {
                    for (int k = 0; k < 324; ++k) {
                        bit_errors += results[static_cast<std::size_t>(w)]
                                          .hard_bits[static_cast<std::size_t>(k)] !=
                                      infos[static_cast<std::size_t>(w)][static_cast<std::size_t>(k)];
                    }
                }
            }
            const double ber = static_cast<double>(bit_errors) /
                               (324.0 * static_cast<double>(n_words));
            cell.records.push_back({"ldpc_ber", variant, "snr_db", snr_db, "ber", ber,
                                    static_cast<std::uint64_t>(trial)});
        }
    }
    return cell;
}

}  // namespace

std::vector<MetricRecord> run_ldpc_ber(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto variants = selected_variants(cfg);
    const auto sys = ldpc::build_code(648, 0.5);

    std::vector<BerCell> cells(static_cast<std::size_t>(cfg.lb_n_seeds));
    parallel_for_index(cfg.lb_n_seeds, [&](int t) {
        cells[static_cast<std::size_t>(t)] = ldpc_trial(cfg, sys, t, variants);
    });

    std::vector<MetricRecord> records;
    for (const auto& c : cells) {
        records.insert(records.end(), c.records.begin(), c.records.end());
    }
    auto os = open_out(out_dir, "ldpc_ber.csv");
    write_metrics_csv(os, records);
    write_run_meta(cfg, out_dir);
    return records;
}

std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg,
                                         const std::string& out_dir) {
    switch (cfg.experiment) {
        case ExperimentKind::KernelBench: return run_kernel_bench(cfg, out_dir);
        case ExperimentKind::LosNlos: return run_losnlos(cfg, out_dir);
        case ExperimentKind::LdpcBer: return run_ldpc_ber(cfg, out_dir);
    }
    throw ParameterError("run_experiment: unknown experiment");
}

}  // namespace rffsim::sim
