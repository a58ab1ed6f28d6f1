#include "rffsim/lstm.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "rffsim/binio.hpp"
#include "rffsim/csv.hpp"
#include "rffsim/errors.hpp"
#include "rffsim/rng.hpp"

namespace rffsim::lstm {

namespace {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

void check_batch(const LstmParameters& params, const SequenceBatch& batch) {
    if (batch.features.empty()) throw ParameterError("lstm: empty batch");
    if (batch.features.size() != batch.labels.size()) {
        throw ParameterError("lstm: features and labels misaligned");
    }
    for (std::size_t s = 0; s < batch.features.size(); ++s) {
        if (batch.features[s].rows() == 0) throw ParameterError("lstm: empty sequence");
        if (batch.features[s].cols() != params.n_inputs()) {
            throw ParameterError("lstm: feature width does not match parameters");
        }
        if (static_cast<std::size_t>(batch.features[s].rows()) != batch.labels[s].size()) {
            throw ParameterError("lstm: sequence " + std::to_string(s) +
                                 " labels misaligned with features");
        }
        if (!batch.features[s].allFinite()) {
            throw DataError("lstm: non-finite features in sequence " + std::to_string(s));
        }
        for (int l : batch.labels[s]) {
            if (l != 0 && l != 1) throw ParameterError("lstm: labels must be 0 or 1");
        }
    }
}

// Cached per-timestep activations for BPTT.
struct Trace {
    Eigen::MatrixXd f, i, o, g, chi, gam;  // T x n_h
    Eigen::VectorXd prob;                  // T
};

Trace run_forward(const LstmParameters& p, const Eigen::MatrixXd& seq) {
    const Eigen::Index steps = seq.rows();
    const Eigen::Index nh = p.n_hidden();
    Trace tr;
    tr.f.resize(steps, nh);
    tr.i.resize(steps, nh);
    tr.o.resize(steps, nh);
    tr.g.resize(steps, nh);
    tr.chi.resize(steps, nh);
    tr.gam.resize(steps, nh);
    tr.prob.resize(steps);

    Eigen::VectorXd chi = Eigen::VectorXd::Zero(nh);
    Eigen::VectorXd gam = Eigen::VectorXd::Zero(nh);
    for (Eigen::Index t = 0; t < steps; ++t) {
        const Eigen::VectorXd x = seq.row(t).transpose();
        const Eigen::ArrayXd f = sigmoid((p.b1 * x + p.b2 * gam + p.bias_f).array());
        const Eigen::ArrayXd i = sigmoid((p.a1 * x + p.a2 * gam + p.bias_i).array());
        const Eigen::ArrayXd o = sigmoid((p.d1 * x + p.d2 * gam + p.bias_o).array());
        const Eigen::ArrayXd g = (p.f1 * x + p.f2 * gam + p.bias_c).array().tanh();
        chi = (chi.array() * f + i * g).matrix();
        gam = (o * chi.array().tanh()).matrix();
        tr.f.row(t) = f.transpose();
        tr.i.row(t) = i.transpose();
        tr.o.row(t) = o.transpose();
        tr.g.row(t) = g.transpose();
        tr.chi.row(t) = chi.transpose();
        tr.gam.row(t) = gam.transpose();
        tr.prob(t) = 1.0 / (1.0 + std::exp(-(p.w_out.dot(gam) + p.c_out)));
    }
    return tr;
}

LstmParameters zeros_like(const LstmParameters& p) {
    LstmParameters z;
    const auto nh = p.n_hidden();
    const auto ng = p.n_inputs();
    z.a1 = Eigen::MatrixXd::Zero(nh, ng);
    z.b1 = Eigen::MatrixXd::Zero(nh, ng);
    z.d1 = Eigen::MatrixXd::Zero(nh, ng);
    z.f1 = Eigen::MatrixXd::Zero(nh, ng);
    z.a2 = Eigen::MatrixXd::Zero(nh, nh);
    z.b2 = Eigen::MatrixXd::Zero(nh, nh);
    z.d2 = Eigen::MatrixXd::Zero(nh, nh);
    z.f2 = Eigen::MatrixXd::Zero(nh, nh);
    z.bias_i = Eigen::VectorXd::Zero(nh);
    z.bias_f = Eigen::VectorXd::Zero(nh);
    z.bias_o = Eigen::VectorXd::Zero(nh);
    z.bias_c = Eigen::VectorXd::Zero(nh);
    z.w_out = Eigen::VectorXd::Zero(nh);
    z.c_out = 0.0;
    return z;
}

double squared_norm(const LstmParameters& g) {
    return g.a1.squaredNorm() + g.b1.squaredNorm() + g.d1.squaredNorm() + g.f1.squaredNorm() +
           g.a2.squaredNorm() + g.b2.squaredNorm() + g.d2.squaredNorm() + g.f2.squaredNorm() +
           g.bias_i.squaredNorm() + g.bias_f.squaredNorm() + g.bias_o.squaredNorm() +
           g.bias_c.squaredNorm() + g.w_out.squaredNorm() + g.c_out * g.c_out;
}

void axpy(LstmParameters& dst, const LstmParameters& src, double a) {
    dst.a1 += a * src.a1;
    dst.b1 += a * src.b1;
    dst.d1 += a * src.d1;
    dst.f1 += a * src.f1;
    dst.a2 += a * src.a2;
    dst.b2 += a * src.b2;
    dst.d2 += a * src.d2;
    dst.f2 += a * src.f2;
    dst.bias_i += a * src.bias_i;
    dst.bias_f += a * src.bias_f;
    dst.bias_o += a * src.bias_o;
    dst.bias_c += a * src.bias_c;
    dst.w_out += a * src.w_out;
    dst.c_out += a * src.c_out;
}

}  // namespace

LstmParameters init_parameters(int n_inputs, int n_hidden, std::uint64_t seed) {
    if (n_inputs < 1 || n_hidden < 1) {
        throw ParameterError("init_parameters: dimensions must be >= 1");
    }
    Rng rng(seed);
    const double u = 1.0 / std::sqrt(static_cast<double>(n_hidden));
    auto fill = [&](Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
        m.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-u, u);
        }
    };
    LstmParameters p;
    fill(p.a1, n_hidden, n_inputs);
    fill(p.b1, n_hidden, n_inputs);
    fill(p.d1, n_hidden, n_inputs);
    fill(p.f1, n_hidden, n_inputs);
    fill(p.a2, n_hidden, n_hidden);
    fill(p.b2, n_hidden, n_hidden);
    fill(p.d2, n_hidden, n_hidden);
    fill(p.f2, n_hidden, n_hidden);
    p.bias_i = Eigen::VectorXd::Zero(n_hidden);
    p.bias_f = Eigen::VectorXd::Ones(n_hidden);
    p.bias_o = Eigen::VectorXd::Zero(n_hidden);
    p.bias_c = Eigen::VectorXd::Zero(n_hidden);
    p.w_out.resize(n_hidden);
    for (Eigen::Index r = 0; r < n_hidden; ++r) p.w_out(r) = rng.uniform(-u, u);
    p.c_out = 0.0;
    return p;
}

ForwardResult lstm_forward(const LstmParameters& params, const Eigen::MatrixXd& sequence) {
    if (sequence.rows() == 0) throw ParameterError("lstm_forward: empty sequence");
    if (sequence.cols() != params.n_inputs()) {
        throw ParameterError("lstm_forward: feature width does not match parameters");
    }
    if (!sequence.allFinite()) throw DataError("lstm_forward: non-finite input");

    const Trace tr = run_forward(params, sequence);
    ForwardResult out;
    out.states.reserve(static_cast<std::size_t>(sequence.rows()));
    out.probabilities.reserve(static_cast<std::size_t>(sequence.rows()));
    for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
        out.states.push_back({tr.chi.row(t).transpose(), tr.gam.row(t).transpose()});
        out.probabilities.push_back(tr.prob(t));
    }
    return out;
}

GradientResult lstm_gradients(const LstmParameters& params, const SequenceBatch& batch) {
    check_batch(params, batch);
    const Eigen::Index nh = params.n_hidden();

    std::size_t total_steps = 0;
    for (const auto& l : batch.labels) total_steps += l.size();
    const double inv_total = 1.0 / static_cast<double>(total_steps);

    GradientResult res;
    res.gradients = zeros_like(params);
    LstmParameters& g = res.gradients;
    double loss = 0.0;

    for (std::size_t s = 0; s < batch.features.size(); ++s) {
        const Eigen::MatrixXd& seq = batch.features[s];
        const auto& labels = batch.labels[s];
        const Eigen::Index steps = seq.rows();
        const Trace tr = run_forward(params, seq);

        for (Eigen::Index t = 0; t < steps; ++t) {
            const double p = tr.prob(t);
            const double y = static_cast<double>(labels[static_cast<std::size_t>(t)]);
            loss -= inv_total * (y * std::log(p) + (1.0 - y) * std::log1p(-p));
        }

        Eigen::VectorXd dgam_next = Eigen::VectorXd::Zero(nh);
        Eigen::VectorXd dchi_next = Eigen::VectorXd::Zero(nh);
        for (Eigen::Index t = steps - 1; t >= 0; --t) {
            const double da =
                (tr.prob(t) - static_cast<double>(labels[static_cast<std::size_t>(t)])) *
                inv_total;
            const Eigen::ArrayXd gam_t = tr.gam.row(t).transpose().array();
            g.w_out += da * gam_t.matrix();
            g.c_out += da;

            const Eigen::ArrayXd dgam = (da * params.w_out + dgam_next).array();
            const Eigen::ArrayXd f = tr.f.row(t).transpose().array();
            const Eigen::ArrayXd i = tr.i.row(t).transpose().array();
            const Eigen::ArrayXd o = tr.o.row(t).transpose().array();
            const Eigen::ArrayXd gg = tr.g.row(t).transpose().array();
            const Eigen::ArrayXd tc = tr.chi.row(t).transpose().array().tanh();

            const Eigen::ArrayXd do_ = dgam * tc;
            const Eigen::ArrayXd dchi = dgam * o * (1.0 - tc.square()) + dchi_next.array();

            Eigen::ArrayXd chi_prev = Eigen::ArrayXd::Zero(nh);
            Eigen::VectorXd gam_prev = Eigen::VectorXd::Zero(nh);
            if (t > 0) {
                chi_prev = tr.chi.row(t - 1).transpose().array();
                gam_prev = tr.gam.row(t - 1).transpose();
            }

            const Eigen::VectorXd dzf = (dchi * chi_prev * f * (1.0 - f)).matrix();
            const Eigen::VectorXd dzi = (dchi * gg * i * (1.0 - i)).matrix();
            const Eigen::VectorXd dzo = (do_ * o * (1.0 - o)).matrix();
            const Eigen::VectorXd dzg = (dchi * i * (1.0 - gg.square())).matrix();

            const Eigen::RowVectorXd x_t = seq.row(t);
            g.b1.noalias() += dzf * x_t;
            g.a1.noalias() += dzi * x_t;
            g.d1.noalias() += dzo * x_t;
            g.f1.noalias() += dzg * x_t;
            g.b2.noalias() += dzf * gam_prev.transpose();
            g.a2.noalias() += dzi * gam_prev.transpose();
            g.d2.noalias() += dzo * gam_prev.transpose();
            g.f2.noalias() += dzg * gam_prev.transpose();
            g.bias_f += dzf;
            g.bias_i += dzi;
            g.bias_o += dzo;
            g.bias_c += dzg;

            dgam_next = params.b2.transpose() * dzf + params.a2.transpose() * dzi +
                        params.d2.transpose() * dzo + params.f2.transpose() * dzg;
            dchi_next = (dchi * f).matrix();
        }
    }

    if (!std::isfinite(loss)) {
        throw NumericError("lstm_gradients: non-finite loss");
    }
    res.loss = loss;
    return res;
}

LstmParameters train(LstmParameters params, const SequenceBatch& batch,
                     const TrainOptions& opts, std::vector<double>* loss_history) {
    if (!(opts.learning_rate >= 0.0)) throw ParameterError("train: learning_rate must be >= 0");
    if (opts.epochs < 1) throw ParameterError("train: epochs must be >= 1");
    if (!(opts.gradient_clip > 0.0)) throw ParameterError("train: gradient_clip must be positive");
    check_batch(params, batch);

    if (loss_history) loss_history->clear();
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        GradientResult gr = lstm_gradients(params, batch);
        if (!std::isfinite(gr.loss) || gr.loss > 1e6) {
            throw TrainingDivergenceError("train: loss diverged at epoch " +
                                          std::to_string(epoch + 1));
        }
        if (loss_history) loss_history->push_back(gr.loss);
        if (opts.learning_rate == 0.0) continue;
        const double norm = std::sqrt(squared_norm(gr.gradients));
        const double scale =
            norm > opts.gradient_clip ? opts.learning_rate * opts.gradient_clip / norm
                                      : opts.learning_rate;
        axpy(params, gr.gradients, -scale);
    }
    return params;
}

EvaluationReport evaluate(const LstmParameters& params, const SequenceBatch& batch) {
    check_batch(params, batch);

    std::vector<double> probs;
    std::vector<int> labels;
    for (std::size_t s = 0; s < batch.features.size(); ++s) {
        const ForwardResult fr = lstm_forward(params, batch.features[s]);
        probs.insert(probs.end(), fr.probabilities.begin(), fr.probabilities.end());
        labels.insert(labels.end(), batch.labels[s].begin(), batch.labels[s].end());
    }
    const std::size_t n = probs.size();

    EvaluationReport rep;
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<std::size_t>(l);
    const std::size_t n_neg = n - n_pos;

    // hard decisions at 0.5; NLOS (label 1) is the positive class
    std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const int pred = probs[k] >= 0.5 ? 1 : 0;
        if (pred == labels[k]) ++correct;
        if (pred == 1 && labels[k] == 1) ++tp;
        if (pred == 1 && labels[k] == 0) ++fp;
        if (pred == 0 && labels[k] == 1) ++fn;
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (n_pos > 0 && n_neg > 0) {
        rep.f1 = 2.0 * static_cast<double>(tp) /
                 std::max(2.0 * static_cast<double>(tp) + static_cast<double>(fp) +
                              static_cast<double>(fn),
                          1.0);
    }

    rep.roc.reserve(101);
    for (int k = 0; k <= 100; ++k) {
        const double thr = static_cast<double>(k) / 100.0;
        std::size_t tpr_n = 0, fpr_n = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (probs[j] >= thr) {
                if (labels[j] == 1) ++tpr_n;
                else ++fpr_n;
            }
        }
        rep.roc.push_back({thr,
                           n_neg ? static_cast<double>(fpr_n) / static_cast<double>(n_neg) : 0.0,
                           n_pos ? static_cast<double>(tpr_n) / static_cast<double>(n_pos) : 0.0});
    }
    return rep;
}

void write_roc_csv(const std::vector<RocPoint>& roc, std::ostream& os) {
    os << "threshold,fpr,tpr\n";
    for (const auto& pt : roc) {
        os << sim::format_double(pt.threshold) << ',' << sim::format_double(pt.fpr) << ','
           << sim::format_double(pt.tpr) << "\n";
    }
}

void write_training_curve_csv(const std::vector<double>& losses, std::ostream& os) {
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < losses.size(); ++e) {
        os << (e + 1) << ',' << sim::format_double(losses[e]) << "\n";
    }
}

FeatureCascade make_feature_cascade(int n_in, int n_mid, int n_out, double sigma,
                                    std::uint64_t seed) {
    if (n_in < 1 || n_mid < 1 || n_out < 1) {
        throw ParameterError("make_feature_cascade: dimensions must be >= 1");
    }
    Rng rng(seed);
    FeatureCascade stage;
    stage.weight.resize(n_mid, n_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_in));
    for (Eigen::Index r = 0; r < n_mid; ++r) {
        for (Eigen::Index c = 0; c < n_in; ++c) stage.weight(r, c) = rng.gaussian(0.0, scale);
    }
    stage.bias = Eigen::VectorXd::Zero(n_mid);
    stage.map = rff::sample_feature_map(n_mid, n_out, sigma, derive_seed(seed, 1));
    return stage;
}

Eigen::MatrixXd apply_cascade(const FeatureCascade& stage, const Eigen::MatrixXd& features) {
    if (features.cols() != stage.weight.cols()) {
        throw ParameterError("apply_cascade: feature width does not match the stage");
    }
    Eigen::MatrixXd mid = features * stage.weight.transpose();
    mid.rowwise() += stage.bias.transpose();
    return rff::rff_transform_batch(stage.map, mid);
}

void save_parameters(const LstmParameters& p, std::ostream& os) {
    write_u64_le(os, static_cast<std::uint64_t>(p.n_hidden()));
    write_u64_le(os, static_cast<std::uint64_t>(p.n_inputs()));
    auto dump = [&os](const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64_le(os, m(r, c));
        }
    };
    dump(p.a1);
    dump(p.b1);
    dump(p.d1);
    dump(p.f1);
    dump(p.a2);
    dump(p.b2);
    dump(p.d2);
    dump(p.f2);
    dump(p.bias_i);
    dump(p.bias_f);
    dump(p.bias_o);
    dump(p.bias_c);
    dump(p.w_out);
    write_f64_le(os, p.c_out);
}

LstmParameters load_parameters(std::istream& is) {
    const auto nh = static_cast<Eigen::Index>(read_u64_le(is));
    const auto ng = static_cast<Eigen::Index>(read_u64_le(is));
    if (nh < 1 || ng < 1) throw DataError("load_parameters: corrupt header");
    LstmParameters p;
    auto slurp = [&is](Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
        m.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_f64_le(is);
        }
    };
    auto slurp_vec = [&is](Eigen::VectorXd& v, Eigen::Index n) {
        v.resize(n);
        for (Eigen::Index r = 0; r < n; ++r) v(r) = read_f64_le(is);
    };
    slurp(p.a1, nh, ng);
    slurp(p.b1, nh, ng);
    slurp(p.d1, nh, ng);
    slurp(p.f1, nh, ng);
    slurp(p.a2, nh, nh);
    slurp(p.b2, nh, nh);
    slurp(p.d2, nh, nh);
    slurp(p.f2, nh, nh);
    slurp_vec(p.bias_i, nh);
    slurp_vec(p.bias_f, nh);
    slurp_vec(p.bias_o, nh);
    slurp_vec(p.bias_c, nh);
    slurp_vec(p.w_out, nh);
    p.c_out = read_f64_le(is);
    return p;
}

}  // namespace rffsim::lstm
