#include "rffsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "rffsim/csv.hpp"
#include "rffsim/errors.hpp"

namespace rffsim::sim {

namespace {

struct RawValue {
    std::string text;
    int line = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Raw section.key -> value map plus parse-stage problems.
struct RawConfig {
    std::map<std::string, RawValue> values;
    std::vector<std::string> problems;
};

RawConfig read_raw(std::istream& is) {
    RawConfig raw;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                raw.problems.push_back("line " + std::to_string(lineno) +
                                       ": malformed section header '" + t + "'");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                raw.problems.push_back("line " + std::to_string(lineno) + ": empty section name");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            raw.problems.push_back("line " + std::to_string(lineno) +
                                   ": expected 'key = value', got '" + t + "'");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            raw.problems.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (section.empty()) {
            raw.problems.push_back("line " + std::to_string(lineno) + ": key '" + key +
                                   "' outside any [section]");
            continue;
        }
        const std::string full = section + "." + key;
        auto [it, inserted] = raw.values.emplace(full, RawValue{value, lineno});
        if (!inserted) {
            raw.problems.push_back("duplicate key '" + full + "' on lines " +
                                   std::to_string(it->second.line) + " and " +
                                   std::to_string(lineno));
        }
    }
    return raw;
}

class Extractor {
  public:
    explicit Extractor(RawConfig raw) : raw_(std::move(raw)) {
        problems_ = raw_.problems;
    }

    bool has(const std::string& key) const { return raw_.values.count(key) > 0; }

    std::string require_string(const std::string& key) {
        const auto it = raw_.values.find(key);
        if (it == raw_.values.end()) {
            problems_.push_back("missing required key '" + key + "'");
            return "";
        }
        const std::string v = it->second.text;
        raw_.values.erase(it);
        return v;
    }

    void get_string(const std::string& key, std::string& out,
                    const std::vector<std::string>& allowed = {}) {
        const auto it = raw_.values.find(key);
        if (it == raw_.values.end()) return;
        const std::string v = it->second.text;
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            problems_.push_back("line " + std::to_string(it->second.line) + ": key '" + key +
                                "' has unsupported value '" + v + "'");
        } else {
            out = v;
        }
        raw_.values.erase(it);
    }

    template <typename T>
    bool parse_scalar(const std::string& text, T& out) {
        if constexpr (std::is_floating_point_v<T>) {
            std::istringstream ss(text);
            ss >> out;
            return static_cast<bool>(ss) && ss.eof();
        } else {
            const char* b = text.data();
            const char* e = b + text.size();
            const auto res = std::from_chars(b, e, out);
            return res.ec == std::errc() && res.ptr == e;
        }
    }

    template <typename T>
    void get_number(const std::string& key, T& out) {
        const auto it = raw_.values.find(key);
        if (it == raw_.values.end()) return;
        T v{};
        if (!parse_scalar(it->second.text, v)) {
            problems_.push_back("line " + std::to_string(it->second.line) + ": key '" + key +
                                "' expects a number, got '" + it->second.text + "'");
        } else {
            out = v;
        }
        raw_.values.erase(it);
    }

    template <typename T>
    void require_list(const std::string& key, std::vector<T>& out) {
        const auto it = raw_.values.find(key);
        if (it == raw_.values.end()) {
            problems_.push_back("missing required key '" + key + "'");
            return;
        }
        std::vector<T> parsed;
        std::stringstream ss(it->second.text);
        std::string item;
        bool ok = true;
        while (std::getline(ss, item, ',')) {
            T v{};
            if (!parse_scalar(trim(item), v)) {
                ok = false;
                break;
            }
            parsed.push_back(v);
        }
        if (!ok || parsed.empty()) {
            problems_.push_back("line " + std::to_string(it->second.line) + ": key '" + key +
                                "' expects a comma-separated numeric list, got '" +
                                it->second.text + "'");
        } else {
            out = std::move(parsed);
        }
        raw_.values.erase(it);
    }

    void reject_leftovers() {
        for (const auto& [key, val] : raw_.values) {
            problems_.push_back("line " + std::to_string(val.line) + ": unknown key '" + key +
                                "'");
        }
    }

    void finish() {
        if (!problems_.empty()) throw ConfigError(problems_);
    }

    void add_problem(std::string p) { problems_.push_back(std::move(p)); }

  private:
    RawConfig raw_;
    std::vector<std::string> problems_;
};

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::KernelBench: return "kernel_bench";
        case ExperimentKind::LosNlos: return "losnlos";
        case ExperimentKind::LdpcBer: return "ldpc_ber";
    }
    return "unknown";
}

ExperimentConfig parse_config(std::istream& is) {
    Extractor ex(read_raw(is));
    ExperimentConfig cfg;

    const std::string name = ex.require_string("experiment.experiment");
    bool known_experiment = true;
    if (name == "kernel_bench") {
        cfg.experiment = ExperimentKind::KernelBench;
    } else if (name == "losnlos") {
        cfg.experiment = ExperimentKind::LosNlos;
    } else if (name == "ldpc_ber") {
        cfg.experiment = ExperimentKind::LdpcBer;
    } else {
        known_experiment = false;
        if (!name.empty()) {
            ex.add_problem("key 'experiment.experiment' must be one of kernel_bench, losnlos, "
                           "ldpc_ber; got '" + name + "'");
        }
    }

    if (ex.has("experiment.seed")) {
        ex.get_number("experiment.seed", cfg.seed);
    } else {
        ex.add_problem("missing required key 'experiment.seed'");
    }
    ex.get_string("experiment.feature_variant", cfg.feature_variant,
                  {"rff", "ddrff", "none", "all"});

    if (known_experiment) {
        switch (cfg.experiment) {
            case ExperimentKind::KernelBench:
                ex.require_list("kernel_bench.n_g_list", cfg.n_g_list);
                ex.get_number("kernel_bench.n_input", cfg.kb_n_input);
                ex.get_number("kernel_bench.sigma", cfg.kb_sigma);
                ex.get_number("kernel_bench.n_seeds", cfg.kb_n_seeds);
                ex.get_number("kernel_bench.n_pairs", cfg.kb_n_pairs);
                ex.get_number("kernel_bench.n_eval_points", cfg.kb_n_eval_points);
                ex.get_string("kernel_bench.lambda_rule", cfg.kb_lambda_rule,
                              {"silverman", "fixed"});
                ex.get_number("kernel_bench.lambda_value", cfg.kb_lambda_value);
                break;
            case ExperimentKind::LosNlos:
                ex.require_list("losnlos.train_sizes", cfg.train_sizes);
                ex.get_string("losnlos.scenario", cfg.ln_scenario, {"C1", "D1"});
                ex.get_number("losnlos.roc_train_size", cfg.ln_roc_train_size);
                ex.get_number("losnlos.n_seeds", cfg.ln_n_seeds);
                ex.get_number("losnlos.n_subcarriers", cfg.ln_n_subcarriers);
                ex.get_number("losnlos.rician_k_db", cfg.ln_rician_k_db);
                ex.get_number("losnlos.coherence", cfg.ln_coherence);
                ex.get_number("losnlos.step_size", cfg.ln_step_size);
                ex.get_number("losnlos.test_length", cfg.ln_test_length);
                ex.get_number("losnlos.train_x", cfg.ln_train_x);
                ex.get_number("losnlos.train_y", cfg.ln_train_y);
                ex.get_number("losnlos.test_x", cfg.ln_test_x);
                ex.get_number("losnlos.test_y", cfg.ln_test_y);
                ex.get_number("losnlos.base_x", cfg.ln_base_x);
                ex.get_number("losnlos.base_y", cfg.ln_base_y);
                ex.get_number("losnlos.n_hidden", cfg.ln_n_hidden);
                ex.get_number("losnlos.n_features", cfg.ln_n_features);
                ex.get_number("losnlos.epochs", cfg.ln_epochs);
                ex.get_number("losnlos.learning_rate", cfg.ln_learning_rate);
                ex.get_number("losnlos.gradient_clip", cfg.ln_gradient_clip);
                ex.get_string("losnlos.extra_stage", cfg.ln_extra_stage, {"true", "false"});
                ex.get_number("losnlos.extra_stage_width", cfg.ln_extra_stage_width);
                break;
            case ExperimentKind::LdpcBer:
                ex.require_list("ldpc_ber.snr_db_list", cfg.snr_db_list);
                ex.get_number("ldpc_ber.n_info_bits", cfg.lb_n_info_bits);
                ex.get_number("ldpc_ber.n_seeds", cfg.lb_n_seeds);
                ex.get_string("ldpc_ber.channel", cfg.lb_channel, {"rapp", "awgn"});
                ex.get_number("ldpc_ber.v_sat", cfg.lb_v_sat);
                ex.get_number("ldpc_ber.rapp_knee", cfg.lb_rapp_knee);
                ex.get_number("ldpc_ber.alpha", cfg.lb_alpha);
                ex.get_number("ldpc_ber.input_backoff", cfg.lb_input_backoff);
                ex.get_number("ldpc_ber.h_gain", cfg.lb_h_gain);
                ex.get_number("ldpc_ber.max_outer", cfg.lb_max_outer);
                ex.get_number("ldpc_ber.max_inner", cfg.lb_max_inner);
                ex.get_number("ldpc_ber.ridge", cfg.lb_ridge);
                break;
        }
    }
    ex.reject_leftovers();

    // Range checks on resolved values.
    auto positive = [&](double v, const std::string& key) {
        if (!(v > 0.0)) ex.add_problem("key '" + key + "' must be positive");
    };
    if (known_experiment) {
        switch (cfg.experiment) {
            case ExperimentKind::KernelBench:
                for (int g : cfg.n_g_list) {
                    if (g < 1) ex.add_problem("kernel_bench.n_g_list entries must be >= 1");
                }
                positive(cfg.kb_sigma, "kernel_bench.sigma");
                positive(cfg.kb_n_seeds, "kernel_bench.n_seeds");
                positive(cfg.kb_n_pairs, "kernel_bench.n_pairs");
                if (cfg.kb_n_eval_points < 2) {
                    ex.add_problem("kernel_bench.n_eval_points must be >= 2");
                }
                if (cfg.kb_lambda_rule == "fixed") {
                    positive(cfg.kb_lambda_value, "kernel_bench.lambda_value");
                }
                break;
            case ExperimentKind::LosNlos:
                for (int t : cfg.train_sizes) {
                    if (t < 2) ex.add_problem("losnlos.train_sizes entries must be >= 2");
                }
                positive(cfg.ln_n_seeds, "losnlos.n_seeds");
                positive(cfg.ln_step_size, "losnlos.step_size");
                positive(cfg.ln_coherence, "losnlos.coherence");
                positive(cfg.ln_n_hidden, "losnlos.n_hidden");
                positive(cfg.ln_n_features, "losnlos.n_features");
                positive(cfg.ln_epochs, "losnlos.epochs");
                positive(cfg.ln_extra_stage_width, "losnlos.extra_stage_width");
                if (cfg.ln_learning_rate < 0.0) {
                    ex.add_problem("losnlos.learning_rate must be >= 0");
                }
                break;
            case ExperimentKind::LdpcBer:
                positive(cfg.lb_n_info_bits, "ldpc_ber.n_info_bits");
                positive(cfg.lb_n_seeds, "ldpc_ber.n_seeds");
                positive(cfg.lb_v_sat, "ldpc_ber.v_sat");
                positive(cfg.lb_rapp_knee, "ldpc_ber.rapp_knee");
                if (cfg.lb_alpha < 0.0 || cfg.lb_alpha >= 1.0) {
                    ex.add_problem("ldpc_ber.alpha must be in [0, 1)");
                }
                positive(cfg.lb_input_backoff, "ldpc_ber.input_backoff");
                positive(cfg.lb_h_gain, "ldpc_ber.h_gain");
                positive(cfg.lb_max_outer, "ldpc_ber.max_outer");
                positive(cfg.lb_max_inner, "ldpc_ber.max_inner");
                if (cfg.lb_ridge < 0.0) ex.add_problem("ldpc_ber.ridge must be >= 0");
                break;
        }
    }

    ex.finish();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError({"cannot open config file '" + path + "'"});
    return parse_config(is);
}

std::string describe_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "experiment = " << to_string(cfg.experiment) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "feature_variant = " << cfg.feature_variant << "\n";
    auto fd = [](double v) { return format_double(v); };
    switch (cfg.experiment) {
        case ExperimentKind::KernelBench: {
            os << "\n[kernel_bench]\n";
            os << "n_g_list = ";
            for (std::size_t i = 0; i < cfg.n_g_list.size(); ++i) {
                os << (i ? "," : "") << cfg.n_g_list[i];
            }
            os << "\n";
            os << "n_input = " << cfg.kb_n_input << "\n";
            os << "sigma = " << fd(cfg.kb_sigma) << "\n";
            os << "n_seeds = " << cfg.kb_n_seeds << "\n";
            os << "n_pairs = " << cfg.kb_n_pairs << "\n";
            os << "n_eval_points = " << cfg.kb_n_eval_points << "\n";
            os << "lambda_rule = " << cfg.kb_lambda_rule << "\n";
            os << "lambda_value = " << fd(cfg.kb_lambda_value) << "\n";
            break;
        }
        case ExperimentKind::LosNlos: {
            os << "\n[losnlos]\n";
            os << "train_sizes = ";
            for (std::size_t i = 0; i < cfg.train_sizes.size(); ++i) {
                os << (i ? "," : "") << cfg.train_sizes[i];
            }
            os << "\n";
            os << "scenario = " << cfg.ln_scenario << "\n";
            os << "roc_train_size = " << cfg.ln_roc_train_size << "\n";
            os << "n_seeds = " << cfg.ln_n_seeds << "\n";
            os << "n_subcarriers = " << cfg.ln_n_subcarriers << "\n";
            os << "rician_k_db = " << fd(cfg.ln_rician_k_db) << "\n";
            os << "coherence = " << cfg.ln_coherence << "\n";
            os << "step_size = " << fd(cfg.ln_step_size) << "\n";
            os << "test_length = " << cfg.ln_test_length << "\n";
            os << "train_x = " << fd(cfg.ln_train_x) << "\n";
            os << "train_y = " << fd(cfg.ln_train_y) << "\n";
            os << "test_x = " << fd(cfg.ln_test_x) << "\n";
            os << "test_y = " << fd(cfg.ln_test_y) << "\n";
            os << "base_x = " << fd(cfg.ln_base_x) << "\n";
            os << "base_y = " << fd(cfg.ln_base_y) << "\n";
            os << "n_hidden = " << cfg.ln_n_hidden << "\n";
            os << "n_features = " << cfg.ln_n_features << "\n";
            os << "epochs = " << cfg.ln_epochs << "\n";
            os << "learning_rate = " << fd(cfg.ln_learning_rate) << "\n";
            os << "gradient_clip = " << fd(cfg.ln_gradient_clip) << "\n";
            os << "extra_stage = " << cfg.ln_extra_stage << "\n";
            os << "extra_stage_width = " << cfg.ln_extra_stage_width << "\n";
            break;
        }
        case ExperimentKind::LdpcBer: {
            os << "\n[ldpc_ber]\n";
            os << "snr_db_list = ";
            for (std::size_t i = 0; i < cfg.snr_db_list.size(); ++i) {
                os << (i ? "," : "") << fd(cfg.snr_db_list[i]);
            }
            os << "\n";
            os << "n_info_bits = " << cfg.lb_n_info_bits << "\n";
            os << "n_seeds = " << cfg.lb_n_seeds << "\n";
            os << "channel = " << cfg.lb_channel << "\n";
            os << "v_sat = " << fd(cfg.lb_v_sat) << "\n";
            os << "rapp_knee = " << fd(cfg.lb_rapp_knee) << "\n";
            os << "alpha = " << fd(cfg.lb_alpha) << "\n";
            os << "input_backoff = " << fd(cfg.lb_input_backoff) << "\n";
            os << "h_gain = " << fd(cfg.lb_h_gain) << "\n";
            os << "max_outer = " << cfg.lb_max_outer << "\n";
            os << "max_inner = " << cfg.lb_max_inner << "\n";
            os << "ridge = " << fd(cfg.lb_ridge) << "\n";
            break;
        }
    }
    return os.str();
}

}  // namespace rffsim::sim
