#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace rffsim::sim {

// Shortest decimal string that round-trips to the same double. Keeps CSV
// output byte-stable across runs.
inline std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    return buf;
}

// One long-format metric row.
struct MetricRecord {
    std::string experiment;
    std::string variant;   // rff | ddrff | none
    std::string x_name;    // n_g | snr_db | train_size | threshold ...
    double x_value = 0.0;
    std::string metric;    // mean_abs_err | ber | f1 | ...
    double value = 0.0;
    std::uint64_t seed = 0;
};

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricRecord>& records) {
    os << "experiment,variant,x_name,x_value,metric,value,seed\n";
    for (const auto& r : records) {
        os << r.experiment << ',' << r.variant << ',' << r.x_name << ','
           << format_double(r.x_value) << ',' << r.metric << ',' << format_double(r.value)
           << ',' << r.seed << "\n";
    }
}

}  // namespace rffsim::sim
