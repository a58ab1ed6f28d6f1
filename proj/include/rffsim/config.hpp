#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rffsim::sim {

enum class ExperimentKind { KernelBench, LosNlos, LdpcBer };

std::string to_string(ExperimentKind kind);

// Fully validated experiment description. Defaults are the artifact's
// documented operating points; required keys are the experiment name, the
// seed, and the experiment's sweep list.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::KernelBench;
    std::uint64_t seed = 1;
    std::string feature_variant = "all";  // rff | ddrff | none | all

    // [kernel_bench]
    std::vector<int> n_g_list;
    int kb_n_input = 2;
    double kb_sigma = 1.0;
    int kb_n_seeds = 20;
    int kb_n_pairs = 100;
    int kb_n_eval_points = 200;
    std::string kb_lambda_rule = "silverman";  // silverman | fixed
    double kb_lambda_value = 0.5;

    // [losnlos]
    std::vector<int> train_sizes;
    std::string ln_scenario = "C1";  // C1 | D1
    int ln_roc_train_size = 400;
    int ln_n_seeds = 10;
    int ln_n_subcarriers = 100;
    double ln_rician_k_db = 6.0;
    int ln_coherence = 10;
    double ln_step_size = 1.0;
    int ln_test_length = 6000;
    double ln_train_x = 200.0, ln_train_y = 120.0;
    double ln_test_x = 300.0, ln_test_y = 250.0;
    double ln_base_x = 50.0, ln_base_y = 150.0;
    int ln_n_hidden = 50;
    int ln_n_features = 200;
    int ln_epochs = 300;
    double ln_learning_rate = 0.5;
    double ln_gradient_clip = 5.0;
    std::string ln_extra_stage = "false";  // extra affine+RFF stage before the LSTM
    int ln_extra_stage_width = 64;

    // [ldpc_ber]
    std::vector<double> snr_db_list;
    int lb_n_info_bits = 10000;
    int lb_n_seeds = 10;
    std::string lb_channel = "rapp";  // rapp | awgn
    double lb_v_sat = 0.4;
    double lb_rapp_knee = 2.0;
    double lb_alpha = 0.2;
    double lb_input_backoff = 1.0;
    double lb_h_gain = 1.0;
    int lb_max_outer = 5;
    int lb_max_inner = 50;
    double lb_ridge = 0.01;
};

// Parse and validate `key = value` text with [section] headers. Collects
// every problem (unknown key, duplicate key with both line numbers, type
// mismatch with line context, missing required key) before throwing
// ConfigError.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);

// Deterministic echo of the resolved configuration for run.meta.
std::string describe_config(const ExperimentConfig& cfg);

}  // namespace rffsim::sim
