#include "vaxopt/calib/calibrate.hpp"

#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"
#include "vaxopt/nn/adam.hpp"
#include "vaxopt/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace vaxopt::calib {

using epi::BasicState;
using epi::CompartmentState;
using epi::kCompartments;
using nn::Tape;
using nn::Var;

double grid_slope(double raw, double center, double g)
{
    const double s = nn::sigmoid(raw);
    return 2.0 * g * center * s * (1.0 - s);
}

std::array<double, kThetaSize> theta_vector(const Theta& th)
{
    const auto& r = th.rates;
    return {r.beta1, r.beta2, r.beta3, r.sigma_vacc, r.gamma, r.delta1, r.delta2, r.delta3, th.p1, r.p2, r.mu};
}

Theta theta_from_vector(const std::array<double, kThetaSize>& v, double lambda, double zeta)
{
    Theta th;
    auto& r = th.rates;
    r.lambda = lambda;
    r.zeta = zeta;
    r.beta1 = v[0];
    r.beta2 = v[1];
    r.beta3 = v[2];
    r.sigma_vacc = v[3];
    r.gamma = v[4];
    r.delta1 = v[5];
    r.delta2 = v[6];
    r.delta3 = v[7];
    th.p1 = v[8];
    r.p2 = v[9];
    r.mu = v[10];
    return th;
}

Theta theta_from_params(const epi::EpidemicParams& p, double alpha)
{
    return {static_cast<const epi::BasicRates<double>&>(p), epi::hospitalization_rate(alpha, p.hosp_link)};
}

epi::EpidemicParams params_from_theta(const Theta& th)
{
    epi::EpidemicParams p;
    static_cast<epi::BasicRates<double>&>(p) = th.rates;
    p.hosp_link = {th.p1, 0.0};
    return p;
}

void validate(const CalibrationConfig& cfg)
{
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (!(cfg.lr_final_fraction > 0.0 && cfg.lr_final_fraction <= 1.0)) {
        throw ConfigError("lr_final_fraction must lie in (0, 1]");
    }
    if (!(cfg.lambda_data >= 0.0) || !(cfg.lambda_de >= 0.0)) {
        throw ConfigError("loss weights must be non-negative");
    }
    if (cfg.n_mc == 0) {
        throw ConfigError("n_mc must be at least 1");
    }
    if (!(cfg.grid_fraction > 0.0 && cfg.grid_fraction < 1.0)) {
        throw ConfigError("grid_fraction must lie in (0, 1)");
    }
    if (cfg.augmentation != 1 && cfg.augmentation != 5 && cfg.augmentation != 10 && cfg.augmentation != 20) {
        throw ConfigError("augmentation must be one of 1, 5, 10, 20");
    }
    if (cfg.hidden.empty() || std::find(cfg.hidden.begin(), cfg.hidden.end(), 0u) != cfg.hidden.end()) {
        throw ConfigError("hidden layer sizes must be positive");
    }
    if (cfg.log_every == 0) {
        throw ConfigError("log_every must be at least 1");
    }
    for (double c : theta_vector(cfg.theta_center)) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
            throw ConfigError("grid centers must be finite and non-negative");
        }
    }
    for (double c : cfg.z_center.sigma) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
            throw ConfigError("noise grid centers must be finite and non-negative");
        }
    }
}

nlohmann::json theta_to_json(const Theta& th)
{
    nlohmann::json doc;
    doc["lambda"] = th.rates.lambda;
    doc["zeta"] = th.rates.zeta;
    const auto v = theta_vector(th);
    for (std::size_t j = 0; j < kThetaSize; ++j) {
        doc[kThetaNames[j]] = v[j];
    }
    return doc;
}

Theta theta_from_json(const nlohmann::json& doc)
{
    try {
        std::array<double, kThetaSize> v{};
        for (std::size_t j = 0; j < kThetaSize; ++j) {
            v[j] = doc.at(kThetaNames[j]).get<double>();
        }
        return theta_from_vector(v, doc.at("lambda").get<double>(), doc.at("zeta").get<double>());
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed theta: ") + e.what());
    }
}

nlohmann::json to_json(const CalibrationConfig& cfg)
{
    return {
        {"epochs", cfg.epochs},
        {"learning_rate", cfg.learning_rate},
        {"lr_final_fraction", cfg.lr_final_fraction},
        {"lambda_data", cfg.lambda_data},
        {"lambda_de", cfg.lambda_de},
        {"n_mc", cfg.n_mc},
        {"grid_fraction", cfg.grid_fraction},
        {"augmentation", cfg.augmentation},
        {"hidden", cfg.hidden},
        {"seed", cfg.seed},
        {"log_every", cfg.log_every},
        {"normalize", cfg.normalize},
        {"theta_center", theta_to_json(cfg.theta_center)},
        {"z_center", epi::to_json(cfg.z_center)},
    };
}

CalibrationConfig calibration_config_from_json(const nlohmann::json& doc, CalibrationConfig cfg)
{
    if (!doc.is_object()) {
        throw ConfigError("calibration config must be an object");
    }
    io::require_counts(doc, {"epochs", "n_mc", "augmentation", "hidden", "seed", "log_every"});
    try {
        cfg.epochs = doc.value("epochs", cfg.epochs);
        cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
        cfg.lr_final_fraction = doc.value("lr_final_fraction", cfg.lr_final_fraction);
        cfg.lambda_data = doc.value("lambda_data", cfg.lambda_data);
        cfg.lambda_de = doc.value("lambda_de", cfg.lambda_de);
        cfg.n_mc = doc.value("n_mc", cfg.n_mc);
        cfg.grid_fraction = doc.value("grid_fraction", cfg.grid_fraction);
        cfg.augmentation = doc.value("augmentation", cfg.augmentation);
        cfg.hidden = doc.value("hidden", cfg.hidden);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.log_every = doc.value("log_every", cfg.log_every);
        cfg.normalize = doc.value("normalize", cfg.normalize);
        if (doc.contains("theta_center")) {
            cfg.theta_center = theta_from_json(doc["theta_center"]);
        }
        if (doc.contains("z_center")) {
            cfg.z_center = epi::noise_from_json(doc["z_center"]);
        }
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("calibration config: ") + e.what());
    }
    catch (const InputError& e) {
        throw ConfigError(std::string("calibration config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

// ---- network ----------------------------------------------------------------

namespace {

double normalized(const PinnNetwork& p, double t) { return (t - p.t0) / p.t_span; }

struct Recorded {
    BasicState<Var> y;
    BasicState<Var> dy;
};

Recorded record_with_derivative(const PinnNetwork& p, const nn::BoundParameters& bp, Tape& tape, double t)
{
    const Var in = tape.input(normalized(p, t));
    const double dir = 1.0 / p.t_span;
    auto out = p.net.forward_with_tangent(bp, std::span<const Var>(&in, 1), std::span<const double>(&dir, 1));
    Recorded r;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        r.y[k] = out.values[k] * p.scale[k];
        r.dy[k] = out.tangents[k] * p.scale[k];
    }
    return r;
}

BasicState<Var> record(const PinnNetwork& p, const nn::BoundParameters& bp, Tape& tape, double t)
{
    const Var in = tape.input(normalized(p, t));
    auto out = p.net.forward(bp, std::span<const Var>(&in, 1));
    BasicState<Var> y;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        y[k] = out[k] * p.scale[k];
    }
    return y;
}

using Weights = std::array<double, kCompartments>;

constexpr Weights kUnit = {1, 1, 1, 1, 1, 1, 1, 1};

Var squared_error(Tape& tape, const BasicState<Var>& a, const CompartmentState& b, const Weights& w)
{
    std::array<Var, kCompartments> terms;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        terms[k] = w[k] * nn::square(a[k] - b[k]);
    }
    return tape.sum(terms);
}

Var squared_error(Tape& tape, const BasicState<Var>& a, const BasicState<Var>& b, const Weights& w)
{
    std::array<Var, kCompartments> terms;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        terms[k] = w[k] * nn::square(a[k] - b[k]);
    }
    return tape.sum(terms);
}

template <class T>
struct TapeTheta {
    epi::BasicRates<T> rates;
    T p1;
};

TapeTheta<Var> constant_theta(Tape& tape, const Theta& th)
{
    TapeTheta<Var> out;
    const auto v = theta_vector(th);
    std::array<Var, kThetaSize> vars;
    for (std::size_t j = 0; j < kThetaSize; ++j) {
        vars[j] = tape.constant(v[j]);
    }
    auto& r = out.rates;
    r.lambda = tape.constant(th.rates.lambda);
    r.zeta = tape.constant(th.rates.zeta);
    r.beta1 = vars[0];
    r.beta2 = vars[1];
    r.beta3 = vars[2];
    r.sigma_vacc = vars[3];
    r.gamma = vars[4];
    r.delta1 = vars[5];
    r.delta2 = vars[6];
    r.delta3 = vars[7];
    out.p1 = vars[8];
    r.p2 = vars[9];
    r.mu = vars[10];
    return out;
}

TapeTheta<Var> theta_from_vars(Tape& tape, const std::array<Var, kThetaSize>& vars, double lambda, double zeta)
{
    TapeTheta<Var> out;
    auto& r = out.rates;
    r.lambda = tape.constant(lambda);
    r.zeta = tape.constant(zeta);
    r.beta1 = vars[0];
    r.beta2 = vars[1];
    r.beta3 = vars[2];
    r.sigma_vacc = vars[3];
    r.gamma = vars[4];
    r.delta1 = vars[5];
    r.delta2 = vars[6];
    r.delta3 = vars[7];
    out.p1 = vars[8];
    r.p2 = vars[9];
    r.mu = vars[10];
    return out;
}

Var residual_det_term(Tape& tape, const Recorded& r, double alpha, const TapeTheta<Var>& th, const Weights& w)
{
    const auto f = epi::drift_with_p1(r.y, alpha, th.rates, th.p1);
    return squared_error(tape, f, r.dy, w);
}

/// Mean over draws of the one-step mismatch; ys are the recorded outputs on the grid.
Var residual_sto_term(Tape& tape, const std::vector<BasicState<Var>>& ys, const std::vector<double>& rates,
                      const TapeTheta<Var>& th, const std::array<Var, kCompartments>& z, std::size_t n_mc, double dt,
                      std::uint64_t seed, const Weights& w)
{
    const std::size_t steps = ys.size() - 1;
    const double sq = std::sqrt(dt);
    std::vector<Var> per_draw;
    std::vector<Var> per_step(steps);
    for (std::size_t j = 0; j < n_mc; ++j) {
        const auto noise = epi::NoisePath::sample(steps, derive_seed(seed, {j}));
        for (std::size_t i = 0; i < steps; ++i) {
            const auto& y = ys[i];
            const auto f = epi::drift_with_p1(y, rates[i], th.rates, th.p1);
            BasicState<Var> pred;
            for (std::size_t k = 0; k < kCompartments; ++k) {
                pred[k] = (y[k] + f[k] * dt) + (z[k] * y[k]) * (sq * noise.dW[i][k]);
            }
            per_step[i] = squared_error(tape, ys[i + 1], pred, w);
        }
        per_draw.push_back(tape.sum(per_step) / static_cast<double>(steps));
    }
    return tape.sum(per_draw) / static_cast<double>(n_mc);
}

void check_times(const std::vector<double>& times, const std::vector<double>& rates, std::size_t min_points)
{
    if (times.size() < min_points) {
        throw InputError("need at least " + std::to_string(min_points) + " time points");
    }
    if (rates.size() != times.size()) {
        throw ShapeError("one vaccination rate is needed per time point");
    }
}

} // namespace

CompartmentState PinnNetwork::evaluate(double t) const
{
    const double in = normalized(*this, t);
    const auto out = net.forward(std::span<const double>(&in, 1));
    CompartmentState x;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        x[k] = out[k] * scale[k];
    }
    return x;
}

CompartmentState PinnNetwork::derivative(double t) const
{
    Tape tape;
    const auto bp = net.bind(tape);
    const auto r = record_with_derivative(*this, bp, tape, t);
    CompartmentState d;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        d[k] = r.dy[k].value();
    }
    return d;
}

nlohmann::json PinnNetwork::to_json() const
{
    return {{"network", net.to_json()}, {"scale", scale}, {"t0", t0}, {"t_span", t_span}};
}

PinnNetwork PinnNetwork::from_json(const nlohmann::json& doc)
{
    try {
        PinnNetwork p;
        p.net = nn::DenseNetwork::from_json(doc.at("network"));
        p.scale = doc.at("scale").get<std::array<double, kCompartments>>();
        p.t0 = doc.at("t0").get<double>();
        p.t_span = doc.at("t_span").get<double>();
        if (p.net.input_size() != 1 || p.net.output_size() != kCompartments) {
            throw InputError("calibration network must map 1 input to 8 outputs");
        }
        return p;
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed calibration network: ") + e.what());
    }
}

PinnNetwork make_pinn(const ingest::CompartmentSeries& series, const std::vector<std::size_t>& hidden,
                      std::uint64_t seed)
{
    if (series.size() < 2) {
        throw InputError("calibration needs at least two dates");
    }
    std::vector<std::size_t> sizes{1};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(kCompartments);
    std::mt19937_64 rng(seed);
    PinnNetwork p;
    p.net = nn::DenseNetwork::xavier(sizes, nn::Activation::tanh, nn::Activation::sigmoid, rng);
    for (std::size_t k = 0; k < kCompartments; ++k) {
        double hi = 0.0;
        for (const auto& x : series.states) {
            hi = std::max(hi, x[k]);
        }
        p.scale[k] = std::max(2.0 * hi, 1e-6);
    }
    p.t0 = series.t.front();
    p.t_span = std::max(series.t.back() - series.t.front(), 1e-12);
    return p;
}

// ---- losses -----------------------------------------------------------------

double data_loss(const std::vector<CompartmentState>& outputs, const std::vector<CompartmentState>& observed)
{
    if (outputs.size() != observed.size()) {
        throw ShapeError("outputs and observations differ in length");
    }
    if (outputs.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        for (std::size_t k = 0; k < kCompartments; ++k) {
            const double e = outputs[i][k] - observed[i][k];
            acc += e * e;
        }
    }
    return acc / static_cast<double>(outputs.size());
}

double residual_loss_det(const PinnNetwork& pinn, const std::vector<double>& times, const std::vector<double>& rates,
                         const Theta& theta)
{
    check_times(times, rates, 1);
    Tape tape;
    const auto bp = pinn.net.bind(tape);
    const auto th = constant_theta(tape, theta);
    double acc = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto floor = tape.size();
        const auto r = record_with_derivative(pinn, bp, tape, times[i]);
        acc += residual_det_term(tape, r, rates[i], th, kUnit).value();
        tape.rewind(floor);
    }
    return acc / static_cast<double>(times.size());
}

double residual_loss_sto(const PinnNetwork& pinn, const std::vector<double>& times, const std::vector<double>& rates,
                         const Theta& theta, const epi::NoiseIntensities& z, std::size_t n_mc, double dt,
                         std::uint64_t seed)
{
    check_times(times, rates, 2);
    if (n_mc == 0) {
        throw ConfigError("n_mc must be at least 1");
    }
    Tape tape;
    const auto bp = pinn.net.bind(tape);
    const auto th = constant_theta(tape, theta);
    std::array<Var, kCompartments> zv;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        zv[k] = tape.constant(z.sigma[k]);
    }
    std::vector<BasicState<Var>> ys;
    for (double t : times) {
        ys.push_back(record(pinn, bp, tape, t));
    }
    return residual_sto_term(tape, ys, rates, th, zv, n_mc, dt, seed, kUnit).value();
}

// ---- training ---------------------------------------------------------------

namespace {

class Trainer {
public:
    Trainer(const ingest::CompartmentSeries& series, const CalibrationConfig& cfg, bool stochastic)
        : cfg_(cfg), stochastic_(stochastic)
    {
        validate(cfg_);
        series_ = ingest::augment_cubic_spline(series, cfg_.augmentation);
        rates_.resize(series_.size());
        for (std::size_t i = 0; i < series_.size(); ++i) {
            rates_[i] = series_.rate_after(i);
        }
        pinn_ = make_pinn(series_, cfg_.hidden, derive_seed(cfg_.seed, {0xCA1B}));
        n_net_ = pinn_.net.parameter_count();
        n_z_ = stochastic_ ? kCompartments : 0;
        params_ = pinn_.net.parameters();
        params_.resize(n_net_ + kThetaSize + n_z_, 0.0);
        grads_.assign(params_.size(), 0.0);
        centers_ = theta_vector(cfg_.theta_center);
        for (std::size_t k = 0; k < kCompartments; ++k) {
            weights_[k] = cfg_.normalize ? 1.0 / (pinn_.scale[k] * pinn_.scale[k]) : 1.0;
        }
    }

    ParamEstimate run()
    {
        nn::AdamState adam(params_.size(), {cfg_.learning_rate});
        ParamEstimate est;
        est.stochastic = stochastic_;
        const double decay = cfg_.epochs > 1 ? std::log(cfg_.lr_final_fraction) / static_cast<double>(cfg_.epochs - 1) : 0.0;
        for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
            adam.config.learning_rate = cfg_.learning_rate * std::exp(decay * static_cast<double>(epoch));
            const auto rec = stochastic_ ? epoch_sto(epoch) : epoch_det();
            if (!std::isfinite(rec.total)) {
                throw NumericalError("non-finite loss at epoch " + std::to_string(epoch), epoch);
            }
            if (epoch == 0) {
                double norm = 0.0;
                for (std::size_t j = 0; j < kThetaSize; ++j) {
                    norm += grads_[n_net_ + j] * grads_[n_net_ + j];
                }
                est.initial_theta_grad_norm = std::sqrt(norm);
            }
            if (epoch % cfg_.log_every == 0 || epoch + 1 == cfg_.epochs) {
                auto r = rec;
                r.epoch = epoch;
                est.history.push_back(r);
            }
            try {
                nn::adam_step(adam, params_, grads_);
            }
            catch (const NumericalError&) {
                throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch), epoch);
            }
            pinn_.net.set_parameters(std::span<const double>(params_.data(), n_net_));
        }
        est.theta = theta_from_vector(current_theta(), cfg_.theta_center.rates.lambda, cfg_.theta_center.rates.zeta);
        if (stochastic_) {
            est.z = current_z();
        }
        est.network = pinn_;
        return est;
    }

private:
    std::array<double, kThetaSize> current_theta() const
    {
        std::array<double, kThetaSize> v{};
        for (std::size_t j = 0; j < kThetaSize; ++j) {
            v[j] = constrain_to_grid(params_[n_net_ + j], centers_[j], cfg_.grid_fraction);
        }
        return v;
    }

    epi::NoiseIntensities current_z() const
    {
        epi::NoiseIntensities z;
        for (std::size_t k = 0; k < kCompartments; ++k) {
            z.sigma[k] = constrain_to_grid(params_[n_net_ + kThetaSize + k], cfg_.z_center.sigma[k], cfg_.grid_fraction);
        }
        return z;
    }

    // Binds the network and the constrained parameters as leaves; returns the floor.
    std::size_t bind_leaves(nn::BoundParameters& bp, std::array<Var, kThetaSize>& th,
                            std::array<Var, kCompartments>& z)
    {
        tape_.clear();
        bp = pinn_.net.bind(tape_);
        const auto v = current_theta();
        for (std::size_t j = 0; j < kThetaSize; ++j) {
            th[j] = tape_.parameter(v[j]);
        }
        if (stochastic_) {
            const auto zs = current_z();
            for (std::size_t k = 0; k < kCompartments; ++k) {
                z[k] = tape_.parameter(zs.sigma[k]);
            }
        }
        return tape_.size();
    }

    // Pulls leaf adjoints into grads_, chaining through the grid maps.
    void collect(const nn::BoundParameters& bp, const std::array<Var, kThetaSize>& th,
                 const std::array<Var, kCompartments>& z)
    {
        for (std::size_t i = 0; i < n_net_; ++i) {
            grads_[i] = tape_.adjoint(bp.flat[i]);
        }
        for (std::size_t j = 0; j < kThetaSize; ++j) {
            grads_[n_net_ + j] =
                tape_.adjoint(th[j]) * grid_slope(params_[n_net_ + j], centers_[j], cfg_.grid_fraction);
        }
        for (std::size_t k = 0; k < n_z_; ++k) {
            const auto idx = n_net_ + kThetaSize + k;
            grads_[idx] = tape_.adjoint(z[k]) * grid_slope(params_[idx], cfg_.z_center.sigma[k], cfg_.grid_fraction);
        }
    }

    LossRecord epoch_det()
    {
        nn::BoundParameters bp;
        std::array<Var, kThetaSize> thv;
        std::array<Var, kCompartments> zv;
        bind_leaves(bp, thv, zv);
        const auto th = theta_from_vars(tape_, thv, cfg_.theta_center.rates.lambda, cfg_.theta_center.rates.zeta);
        const auto floor = tape_.size();
        const std::size_t n = series_.size();
        const double w = 1.0 / static_cast<double>(n);
        LossRecord rec;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = record_with_derivative(pinn_, bp, tape_, series_.t[i]);
            const auto d = squared_error(tape_, r.y, series_.states[i], weights_);
            const auto res = residual_det_term(tape_, r, rates_[i], th, weights_);
            const auto loss = cfg_.lambda_data * d + cfg_.lambda_de * res;
            rec.data += d.value() * w;
            rec.residual += res.value() * w;
            tape_.accumulate_backward(loss, floor, w);
            tape_.rewind(floor);
        }
        rec.total = cfg_.lambda_data * rec.data + cfg_.lambda_de * rec.residual;
        collect(bp, thv, zv);
        return rec;
    }

    LossRecord epoch_sto(std::size_t epoch)
    {
        nn::BoundParameters bp;
        std::array<Var, kThetaSize> thv;
        std::array<Var, kCompartments> zv;
        const auto floor = bind_leaves(bp, thv, zv);
        const auto th = theta_from_vars(tape_, thv, cfg_.theta_center.rates.lambda, cfg_.theta_center.rates.zeta);
        const std::size_t n = series_.size();
        std::vector<BasicState<Var>> ys;
        ys.reserve(n);
        std::vector<Var> data_terms;
        for (std::size_t i = 0; i < n; ++i) {
            ys.push_back(record(pinn_, bp, tape_, series_.t[i]));
            data_terms.push_back(squared_error(tape_, ys.back(), series_.states[i], weights_));
        }
        const auto d = tape_.sum(data_terms) / static_cast<double>(n);
        const auto res = residual_sto_term(tape_, ys, rates_, th, zv, cfg_.n_mc, series_.spacing(),
                                           derive_seed(cfg_.seed, {epoch}), weights_);
        const auto loss = cfg_.lambda_data * d + cfg_.lambda_de * res;
        tape_.accumulate_backward(loss, floor, 1.0);
        LossRecord rec;
        rec.data = d.value();
        rec.residual = res.value();
        rec.total = loss.value();
        collect(bp, thv, zv);
        return rec;
    }

    CalibrationConfig cfg_;
    bool stochastic_;
    ingest::CompartmentSeries series_;
    std::vector<double> rates_;
    PinnNetwork pinn_;
    std::size_t n_net_ = 0;
    std::size_t n_z_ = 0;
    std::vector<double> params_;
    std::vector<double> grads_;
    std::array<double, kThetaSize> centers_{};
    Weights weights_{};
    Tape tape_;
};

} // namespace

ParamEstimate fit_deterministic(const ingest::CompartmentSeries& series, const CalibrationConfig& cfg)
{
    return Trainer(series, cfg, false).run();
}

ParamEstimate fit_stochastic(const ingest::CompartmentSeries& series, const CalibrationConfig& cfg)
{
    return Trainer(series, cfg, true).run();
}

// ---- evaluation -------------------------------------------------------------

FitMetrics compare(const std::vector<CompartmentState>& predicted, const std::vector<CompartmentState>& observed)
{
    if (predicted.size() != observed.size()) {
        throw ShapeError("prediction and observation lengths differ");
    }
    if (predicted.empty()) {
        throw InputError("nothing to compare");
    }
    FitMetrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        for (std::size_t k = 0; k < kCompartments; ++k) {
            const double e = predicted[i][k] - observed[i][k];
            m.mse += e * e;
            m.mae += std::abs(e);
        }
    }
    const double n = static_cast<double>(predicted.size() * kCompartments);
    m.mse /= n;
    m.mae /= n;
    return m;
}

FitMetrics evaluate_fit(const ParamEstimate& est, const ingest::CompartmentSeries& test, const CompartmentState& x0,
                        std::size_t n_paths, std::uint64_t seed)
{
    if (test.size() < 2) {
        throw InputError("test window needs at least two dates");
    }
    const auto rates = test.interval_rates();
    const auto policy = [&rates](std::size_t i, const CompartmentState&) { return rates[i]; };
    const epi::IntegratorConfig ic{test.spacing(), test.size() - 1};
    const auto params = params_from_theta(est.theta);
    epi::Trajectory traj;
    if (est.z && n_paths > 1) {
        traj = epi::simulate_ensemble(x0, policy, params, *est.z, ic, n_paths, seed).mean;
    }
    else if (est.z && n_paths == 1) {
        traj = epi::simulate_path(x0, policy, params, *est.z, ic, epi::NoisePath::sample(ic.steps, epi::path_seed(seed, 0)));
    }
    else {
        traj = epi::simulate_ode(x0, policy, params, ic);
    }
    return compare(traj.states, test.states);
}

nlohmann::json to_json(const FitMetrics& m) { return {{"mse", m.mse}, {"mae", m.mae}}; }

nlohmann::json estimate_to_json(const ParamEstimate& est, const std::string& loss_history_path,
                                const CalibrationConfig& cfg)
{
    nlohmann::json doc;
    doc["theta"] = theta_to_json(est.theta);
    doc["z"] = est.z ? epi::to_json(*est.z) : nlohmann::json(nullptr);
    doc["loss_history_path"] = loss_history_path;
    doc["config"] = to_json(cfg);
    doc["network"] = est.network.to_json();
    doc["stochastic"] = est.stochastic;
    return doc;
}

ParamEstimate estimate_from_json(const nlohmann::json& doc)
{
    try {
        ParamEstimate est;
        est.theta = theta_from_json(doc.at("theta"));
        if (doc.contains("z") && !doc["z"].is_null()) {
            est.z = epi::noise_from_json(doc["z"]);
        }
        if (doc.contains("network")) {
            est.network = PinnNetwork::from_json(doc["network"]);
        }
        est.stochastic = doc.value("stochastic", est.z.has_value());
        return est;
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed estimate: ") + e.what());
    }
}

void write_loss_history(std::ostream& out, const std::vector<LossRecord>& history)
{
    out << "epoch,total,data,residual\n";
    for (const auto& r : history) {
        out << r.epoch << ',' << io::format_g(r.total) << ',' << io::format_g(r.data) << ',' << io::format_g(r.residual) << '\n';
    }
}

} // namespace vaxopt::calib
