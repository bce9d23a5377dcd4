// SPDX-License-Identifier: Apache-2.0
#include "evtherm/mlp.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace evtherm {

namespace {

void require_same_shape(const MlpWeights& a, const MlpWeights& b,
                        const char* what) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

void check_batch(const MlpWeights& w, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != w.w1.cols()) {
        throw std::invalid_argument("mlp: input dimension mismatch");
    }
}

Eigen::ArrayXXd relu_mask(const Eigen::MatrixXd& z) {
    return (z.array() > 0.0).cast<double>();
}

// Forward pass keeping pre-activations for backprop.
struct ForwardPass {
    Eigen::MatrixXd z1, a1, z2, a2;
    Eigen::RowVectorXd yhat;
};

ForwardPass run_forward(const MlpWeights& w, const Eigen::MatrixXd& x) {
    ForwardPass f;
    f.z1 = (w.w1 * x).colwise() + w.b1;
    f.a1 = f.z1.cwiseMax(0.0);
    f.z2 = (w.w2 * f.a1).colwise() + w.b2;
    f.a2 = f.z2.cwiseMax(0.0);
    f.yhat = (w.w3 * f.a2).array() + w.b3;
    return f;
}

void adam_update(Eigen::Ref<Eigen::MatrixXd> m, Eigen::Ref<Eigen::MatrixXd> v,
                 Eigen::Ref<Eigen::MatrixXd> w, const Eigen::MatrixXd& g,
                 const AdamParams& p, double bias1, double bias2) {
    m = p.beta1 * m + (1.0 - p.beta1) * g;
    v = p.beta2 * v.array().matrix() + (1.0 - p.beta2) * g.array().square().matrix();
    w.array() -= p.learning_rate * (m.array() / bias1) /
                 ((v.array() / bias2).sqrt() + p.epsilon);
}

}  // namespace

MlpWeights MlpWeights::zeros(const MlpShape& shape) {
    MlpWeights w;
    w.w1 = Eigen::MatrixXd::Zero(shape.hidden1, shape.input);
    w.b1 = Eigen::VectorXd::Zero(shape.hidden1);
    w.w2 = Eigen::MatrixXd::Zero(shape.hidden2, shape.hidden1);
    w.b2 = Eigen::VectorXd::Zero(shape.hidden2);
    w.w3 = Eigen::RowVectorXd::Zero(shape.hidden2);
    w.b3 = 0.0;
    return w;
}

MlpShape MlpWeights::shape() const {
    return MlpShape{static_cast<int>(w1.cols()), static_cast<int>(w1.rows()),
                    static_cast<int>(w2.rows())};
}

void MlpWeights::require_finite() const {
    if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() ||
        !b2.allFinite() || !w3.allFinite() || !std::isfinite(b3)) {
        throw std::runtime_error("mlp: non-finite weights");
    }
}

MlpWeights init_weights(const MlpShape& shape, Rng& rng) {
    MlpWeights w = MlpWeights::zeros(shape);
    const auto fill = [&rng](Eigen::Ref<Eigen::MatrixXd> m, int fan_in,
                             int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = rng.uniform(-limit, limit);
            }
        }
    };
    fill(w.w1, shape.input, shape.hidden1);
    fill(w.w2, shape.hidden1, shape.hidden2);
    fill(w.w3, shape.hidden2, 1);
    return w;
}

double forward(const MlpWeights& weights, std::span<const double> input) {
    Eigen::MatrixXd x(input.size(), 1);
    for (std::size_t i = 0; i < input.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = input[i];
    }
    return forward_batch(weights, x)(0);
}

Eigen::RowVectorXd forward_batch(const MlpWeights& weights,
                                 const Eigen::MatrixXd& inputs) {
    check_batch(weights, inputs);
    return run_forward(weights, inputs).yhat;
}

double mse(const MlpWeights& weights, const Eigen::MatrixXd& inputs,
           const Eigen::VectorXd& targets) {
    if (inputs.cols() != targets.size() || inputs.cols() == 0) {
        throw std::invalid_argument("mse: batch size mismatch or empty");
    }
    const Eigen::RowVectorXd yhat = forward_batch(weights, inputs);
    return (yhat.transpose() - targets).squaredNorm() /
           static_cast<double>(targets.size());
}

MlpWeights mse_gradient(const MlpWeights& weights, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets) {
    check_batch(weights, inputs);
    if (inputs.cols() != targets.size() || inputs.cols() == 0) {
        throw std::invalid_argument("mse_gradient: batch size mismatch or empty");
    }
    const ForwardPass f = run_forward(weights, inputs);
    const double batch = static_cast<double>(inputs.cols());

    const Eigen::RowVectorXd dyhat =
        (2.0 / batch) * (f.yhat - targets.transpose());

    MlpWeights g = MlpWeights::zeros(weights.shape());
    g.w3 = dyhat * f.a2.transpose();
    g.b3 = dyhat.sum();

    const Eigen::MatrixXd dz2 =
        ((weights.w3.transpose() * dyhat).array() * relu_mask(f.z2)).matrix();
    g.w2 = dz2 * f.a1.transpose();
    g.b2 = dz2.rowwise().sum();

    const Eigen::MatrixXd dz1 =
        ((weights.w2.transpose() * dz2).array() * relu_mask(f.z1)).matrix();
    g.w1 = dz1 * inputs.transpose();
    g.b1 = dz1.rowwise().sum();
    return g;
}

AdamState AdamState::init(const MlpShape& shape, AdamParams params) {
    AdamState s;
    s.m = MlpWeights::zeros(shape);
    s.v = MlpWeights::zeros(shape);
    s.step_count = 0;
    s.params = params;
    return s;
}

void adam_step(AdamState& state, MlpWeights& weights, const MlpWeights& grads) {
    require_same_shape(weights, grads, "adam_step");
    require_same_shape(weights, state.m, "adam_step");
    ++state.step_count;
    const AdamParams& p = state.params;
    const double bias1 = 1.0 - std::pow(p.beta1, state.step_count);
    const double bias2 = 1.0 - std::pow(p.beta2, state.step_count);

    adam_update(state.m.w1, state.v.w1, weights.w1, grads.w1, p, bias1, bias2);
    adam_update(state.m.b1, state.v.b1, weights.b1, grads.b1, p, bias1, bias2);
    adam_update(state.m.w2, state.v.w2, weights.w2, grads.w2, p, bias1, bias2);
    adam_update(state.m.b2, state.v.b2, weights.b2, grads.b2, p, bias1, bias2);
    adam_update(state.m.w3, state.v.w3, weights.w3, grads.w3, p, bias1, bias2);

    state.m.b3 = p.beta1 * state.m.b3 + (1.0 - p.beta1) * grads.b3;
    state.v.b3 = p.beta2 * state.v.b3 + (1.0 - p.beta2) * grads.b3 * grads.b3;
    weights.b3 -= p.learning_rate * (state.m.b3 / bias1) /
                  (std::sqrt(state.v.b3 / bias2) + p.epsilon);
}

MemberResult train_member(const DesignMatrices& train, const DesignMatrices& val,
                          std::uint64_t seed, const TrainSettings& settings) {
    if (train.inputs.cols() < 1 || val.inputs.cols() < 1) {
        throw std::invalid_argument("train_member: empty split");
    }
    if (train.inputs.rows() != settings.shape.input) {
        throw std::invalid_argument("train_member: input width differs from shape");
    }
    if (settings.epochs < 1 || settings.batch_size < 1) {
        throw std::invalid_argument("train_member: epochs and batch size must be >= 1");
    }

    Rng rng(seed);
    MlpWeights weights = init_weights(settings.shape, rng);
    AdamState adam = AdamState::init(settings.shape, settings.adam);

    const auto n = static_cast<std::size_t>(train.inputs.cols());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    MemberResult result;
    result.best_val_mse = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd batch_x(settings.shape.input, settings.batch_size);
    Eigen::VectorXd batch_y(settings.batch_size);

    for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n;
             start += static_cast<std::size_t>(settings.batch_size)) {
            const auto size = std::min(
                static_cast<std::size_t>(settings.batch_size), n - start);
            const auto cols = static_cast<Eigen::Index>(size);
            for (std::size_t j = 0; j < size; ++j) {
                const auto src = static_cast<Eigen::Index>(order[start + j]);
                batch_x.col(static_cast<Eigen::Index>(j)) = train.inputs.col(src);
                batch_y(static_cast<Eigen::Index>(j)) = train.targets(src);
            }
            const MlpWeights grads = mse_gradient(
                weights, batch_x.leftCols(cols), batch_y.head(cols));
            adam_step(adam, weights, grads);
        }

        const double val_mse = mse(weights, val.inputs, val.targets);
        if (!std::isfinite(val_mse)) {
            std::ostringstream msg;
            msg << "train_member: training diverged (non-finite validation MSE"
                << " at epoch " << epoch << ", seed " << seed << ")";
            throw std::runtime_error(msg.str());
        }
        result.final_val_mse = val_mse;
        if (val_mse < result.best_val_mse) {
            result.best_val_mse = val_mse;
            result.best_epoch = epoch;
            result.weights = weights;
        }
    }
    result.weights.require_finite();
    return result;
}

EnsembleTrainResult train_ensemble(const DesignMatrices& train,
                                   const DesignMatrices& val,
                                   const NormStats& norm,
                                   std::uint64_t base_seed, int n_members,
                                   const TrainSettings& settings) {
    if (n_members < 1) {
        throw std::invalid_argument("train_ensemble: need at least one member");
    }
    EnsembleTrainResult out;
    out.member_results.resize(n_members);
    out.ensemble.norm = norm;
    out.ensemble.member_seeds.resize(n_members);
    for (int i = 0; i < n_members; ++i) {
        out.ensemble.member_seeds[i] = base_seed + static_cast<std::uint64_t>(i);
    }

    const unsigned workers = std::min<unsigned>(
        std::max(1u, std::thread::hardware_concurrency()),
        static_cast<unsigned>(n_members));
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < n_members;
                     i = next.fetch_add(1)) {
                    out.member_results[i] = train_member(
                        train, val, out.ensemble.member_seeds[i], settings);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }

    out.ensemble.members.reserve(n_members);
    for (const auto& r : out.member_results) {
        out.ensemble.members.push_back(r.weights);
    }
    return out;
}

Prediction predict(const Ensemble& ensemble, std::span<const double> window_w) {
    Eigen::MatrixXd x(window_w.size(), 1);
    for (std::size_t i = 0; i < window_w.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = window_w[i];
    }
    const BatchPrediction batch = predict_batch(ensemble, x);
    Prediction p;
    p.mean_c = batch.mean_c(0);
    p.std_c = batch.std_c(0);
    p.member_c.assign(batch.member_c.row(0).begin(), batch.member_c.row(0).end());
    return p;
}

BatchPrediction predict_batch(const Ensemble& ensemble,
                              const Eigen::MatrixXd& windows_w) {
    if (ensemble.members.empty()) {
        throw std::invalid_argument("predict: empty ensemble");
    }
    const auto n_members = static_cast<Eigen::Index>(ensemble.members.size());
    const Eigen::MatrixXd normalized =
        (windows_w.array() - ensemble.norm.input_mean_w) /
        ensemble.norm.input_std_w;

    BatchPrediction out;
    out.member_c.resize(windows_w.cols(), n_members);
    for (Eigen::Index m = 0; m < n_members; ++m) {
        const Eigen::RowVectorXd yhat =
            forward_batch(ensemble.members[m], normalized);
        out.member_c.col(m) = (yhat.transpose().array() *
                               ensemble.norm.target_std_c) +
                              ensemble.norm.target_mean_c;
    }
    out.mean_c = out.member_c.rowwise().mean();
    if (n_members > 1) {
        const Eigen::MatrixXd centered = out.member_c.colwise() - out.mean_c;
        out.std_c = (centered.array().square().rowwise().sum() /
                     static_cast<double>(n_members - 1))
                        .sqrt();
    } else {
        out.std_c = Eigen::VectorXd::Zero(windows_w.cols());
    }
    return out;
}

double student_t_quantile(double probability, int dof) {
    if (dof < 1 || !(probability > 0.0 && probability < 1.0)) {
        throw std::invalid_argument("student_t_quantile: bad arguments");
    }
    const boost::math::students_t_distribution<double> dist(dof);
    return boost::math::quantile(dist, probability);
}

std::pair<double, double> confidence_interval(double mean, double sample_std,
                                              int n, double level) {
    if (n < 2) {
        throw std::invalid_argument("confidence_interval: need n >= 2");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("confidence_interval: level must be in (0, 1)");
    }
    const double t = student_t_quantile(0.5 * (1.0 + level), n - 1);
    const double half_width = t * sample_std / std::sqrt(static_cast<double>(n));
    return {mean - half_width, mean + half_width};
}

}  // namespace evtherm
