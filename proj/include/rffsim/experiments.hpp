#pragma once

#include <string>
#include <vector>

#include "rffsim/config.hpp"
#include "rffsim/csv.hpp"

namespace rffsim::sim {

// Each runner writes its CSV files plus run.meta into out_dir and returns
// the emitted records. All compared variants inside one run consume the
// identical seeded data (common random numbers), and (config, seed) fully
// determines every output byte.
std::vector<MetricRecord> run_kernel_bench(const ExperimentConfig& cfg,
                                           const std::string& out_dir);
std::vector<MetricRecord> run_losnlos(const ExperimentConfig& cfg, const std::string& out_dir);
std::vector<MetricRecord> run_ldpc_ber(const ExperimentConfig& cfg, const std::string& out_dir);

// Dispatch on cfg.experiment.
std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg,
                                         const std::string& out_dir);

void write_run_meta(const ExperimentConfig& cfg, const std::string& out_dir);

// Variants selected by cfg.feature_variant for the given experiment.
std::vector<std::string> selected_variants(const ExperimentConfig& cfg);

}  // namespace rffsim::sim
