#pragma once

#include "vaxopt/epi/model.hpp"
#include "vaxopt/ingest/series.hpp"
#include "vaxopt/nn/dense.hpp"
#include "vaxopt/nn/tape.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vaxopt::calib {

/// center * (1 - g) + 2 g center * sigmoid(raw)
template <class T>
T constrain_to_grid(const T& raw, double center, double g)
{
    using nn::sigmoid;
    return center * (1.0 - g) + (2.0 * g * center) * sigmoid(raw);
}

/// d constrain_to_grid / d raw
double grid_slope(double raw, double center, double g);

inline constexpr std::size_t kThetaSize = 11;
inline constexpr std::array<const char*, kThetaSize> kThetaNames = {
    "beta1", "beta2", "beta3", "sigma_vacc", "gamma", "delta1", "delta2", "delta3", "p1", "p2", "mu"};

/// Calibrated dynamics: the rate set with a constant mild-to-hospital rate p1.
template <class T>
struct BasicTheta {
    epi::BasicRates<T> rates;
    T p1{};
};

using Theta = BasicTheta<double>;

std::array<double, kThetaSize> theta_vector(const Theta& th);
Theta theta_from_vector(const std::array<double, kThetaSize>& v, double lambda, double zeta);

/// Theta from model parameters; p1 is the link evaluated at `alpha`.
Theta theta_from_params(const epi::EpidemicParams& p, double alpha = 0.0);
/// Model parameters with a flat link (p1 constant).
epi::EpidemicParams params_from_theta(const Theta& th);

struct CalibrationConfig {
    std::size_t epochs = 20000;
    double learning_rate = 1e-3;
    /// Geometric decay: the last epoch runs at learning_rate * lr_final_fraction.
    double lr_final_fraction = 1e-3;
    double lambda_data = 1.0;
    double lambda_de = 1.0;
    std::size_t n_mc = 5;
    double grid_fraction = 0.5;
    int augmentation = 1;
    std::vector<std::size_t> hidden = {32, 32, 32};
    std::uint64_t seed = 1;
    std::size_t log_every = 1;
    /// Train on compartments divided by their output ceilings instead of raw proportions.
    bool normalize = true;
    Theta theta_center = theta_from_params(epi::baseline_params());
    epi::NoiseIntensities z_center = epi::baseline_noise();
};

void validate(const CalibrationConfig& cfg);
nlohmann::json to_json(const CalibrationConfig& cfg);
CalibrationConfig calibration_config_from_json(const nlohmann::json& doc, CalibrationConfig base = {});

/// Network mapping normalized time to the 8 compartments. Each output is a sigmoid
/// scaled by a per-compartment ceiling so small compartments keep resolution.
struct PinnNetwork {
    nn::DenseNetwork net;
    std::array<double, epi::kCompartments> scale{};
    double t0 = 0.0;
    double t_span = 1.0;

    epi::CompartmentState evaluate(double t) const;
    /// d/dt of evaluate(t).
    epi::CompartmentState derivative(double t) const;

    nlohmann::json to_json() const;
    static PinnNetwork from_json(const nlohmann::json& doc);
};

/// Fresh network sized for `series`: Xavier weights, ceilings twice the observed maxima.
PinnNetwork make_pinn(const ingest::CompartmentSeries& series, const std::vector<std::size_t>& hidden,
                      std::uint64_t seed);

struct LossRecord {
    std::size_t epoch = 0;
    double total = 0.0;
    double data = 0.0;
    double residual = 0.0;
};

struct ParamEstimate {
    Theta theta;
    std::optional<epi::NoiseIntensities> z; // stochastic fits only
    std::vector<LossRecord> history;
    PinnNetwork network;
    double initial_theta_grad_norm = 0.0;
    bool stochastic = false;
};

/// Mean over dates of the summed squared compartment errors.
double data_loss(const std::vector<epi::CompartmentState>& outputs, const std::vector<epi::CompartmentState>& observed);

/// Mean over dates of |drift(net(t), rate, theta) - d net / dt|^2, with rates[i] the
/// vaccination rate at times[i].
double residual_loss_det(const PinnNetwork& pinn, const std::vector<double>& times, const std::vector<double>& rates,
                         const Theta& theta);

/// Average over n_mc noise draws of the mean squared one-step Euler-Maruyama mismatch
/// between net(t_i) advanced by dt and net(t_i+1). Draw j of the path uses seed
/// derive_seed(seed, {j}).
double residual_loss_sto(const PinnNetwork& pinn, const std::vector<double>& times, const std::vector<double>& rates,
                         const Theta& theta, const epi::NoiseIntensities& z, std::size_t n_mc, double dt,
                         std::uint64_t seed);

/// Trains on the series after cubic-spline augmentation by cfg.augmentation.
/// Throws NumericalError with the epoch index on a non-finite loss.
ParamEstimate fit_deterministic(const ingest::CompartmentSeries& series, const CalibrationConfig& cfg);
ParamEstimate fit_stochastic(const ingest::CompartmentSeries& series, const CalibrationConfig& cfg);

struct FitMetrics {
    double mse = 0.0;
    double mae = 0.0;
};

/// Compare a simulation from x0 over the test dates (ensemble mean over n_paths when the
/// estimate carries noise) with the observations.
FitMetrics evaluate_fit(const ParamEstimate& est, const ingest::CompartmentSeries& test,
                        const epi::CompartmentState& x0, std::size_t n_paths, std::uint64_t seed = 0);

FitMetrics compare(const std::vector<epi::CompartmentState>& predicted,
                   const std::vector<epi::CompartmentState>& observed);

nlohmann::json theta_to_json(const Theta& th);
Theta theta_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const FitMetrics& m);

/// {"theta", "z", "loss_history_path", "config"}
nlohmann::json estimate_to_json(const ParamEstimate& est, const std::string& loss_history_path,
                                const CalibrationConfig& cfg);
ParamEstimate estimate_from_json(const nlohmann::json& doc);

/// `epoch,total,data,residual`
void write_loss_history(std::ostream& out, const std::vector<LossRecord>& history);

} // namespace vaxopt::calib
