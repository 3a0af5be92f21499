#include "vaxopt/epi/model.hpp"

#include "vaxopt/errors.hpp"

#include <cmath>

namespace vaxopt::epi {

bool operator==(const CompartmentState& a, const CompartmentState& b)
{
    for (std::size_t k = 0; k < kCompartments; ++k) {
        if (a[k] != b[k]) {
            return false;
        }
    }
    return true;
}

void validate(const CompartmentState& x)
{
    for (std::size_t k = 0; k < kCompartments; ++k) {
        if (!std::isfinite(x[k]) || x[k] < 0.0) {
            throw InputError(std::string("compartment ") + kCompartmentNames[k] + " must be finite and non-negative");
        }
    }
}

double total(const CompartmentState& x)
{
    double s = 0.0;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        s += x[k];
    }
    return s;
}

EpidemicParams baseline_params()
{
    EpidemicParams p;
    p.lambda = 0.000053;
    p.zeta = 0.000033;
    p.beta1 = 0.28120;
    p.beta2 = 0.15838;
    p.beta3 = 0.03880;
    p.sigma_vacc = 0.06352;
    p.gamma = 0.30954;
    p.delta1 = 0.28505;
    p.delta2 = 0.28269;
    p.delta3 = 0.14206;
    p.p2 = 0.14310;
    p.mu = 0.00420;
    p.hosp_link = {0.0060, -0.1341};
    return p;
}

void validate(const EpidemicParams& p)
{
    const double rates[] = {p.lambda, p.zeta,   p.beta1,  p.beta2,  p.beta3, p.sigma_vacc,
                            p.gamma,  p.delta1, p.delta2, p.delta3, p.p2,    p.mu};
    for (double r : rates) {
        if (!std::isfinite(r) || r < 0.0) {
            throw ConfigError("epidemic rates must be finite and non-negative");
        }
    }
    if (p.sigma_vacc > 1.0) {
        throw ConfigError("sigma_vacc must lie in [0, 1]");
    }
    if (!std::isfinite(p.hosp_link.intercept) || !std::isfinite(p.hosp_link.slope)) {
        throw ConfigError("hospitalization link must be finite");
    }
}

NoiseIntensities baseline_noise()
{
    return {{0.09275, 0.03887, 0.07517, 0.06302, 0.07878, 0.06123, 0.06110, 0.06199}};
}

NoiseIntensities scaled(const NoiseIntensities& z, double factor)
{
    NoiseIntensities out = z;
    for (auto& s : out.sigma) {
        s *= factor;
    }
    return out;
}

CompartmentState baseline_train_state()
{
    return {0.554181, 0.429185, 0.010225, 0.001827, 0.000075, 0.000014, 0.004361, 0.000132};
}

CompartmentState baseline_test_state()
{
    return {0.191591, 0.779949, 0.009535, 0.001896, 0.000044, 0.000006, 0.016773, 0.000206};
}

BasicState<double> drift(const CompartmentState& x, double alpha, const EpidemicParams& p)
{
    for (std::size_t k = 0; k < kCompartments; ++k) {
        if (!std::isfinite(x[k])) {
            throw InputError(std::string("drift: non-finite compartment ") + kCompartmentNames[k]);
        }
    }
    if (!std::isfinite(alpha)) {
        throw InputError("drift: non-finite vaccination rate");
    }
    return drift<double, double>(x, alpha, p);
}

nlohmann::json to_json(const CompartmentState& x)
{
    nlohmann::json doc = nlohmann::json::object();
    for (std::size_t k = 0; k < kCompartments; ++k) {
        doc[kCompartmentNames[k]] = x[k];
    }
    return doc;
}

CompartmentState state_from_json(const nlohmann::json& doc)
{
    CompartmentState x;
    try {
        for (std::size_t k = 0; k < kCompartments; ++k) {
            x[k] = doc.at(kCompartmentNames[k]).get<double>();
        }
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed state: ") + e.what());
    }
    validate(x);
    return x;
}

namespace {

struct NamedRate {
    const char* name;
    double BasicRates<double>::*member;
};

constexpr NamedRate kRates[] = {
    {"lambda", &BasicRates<double>::lambda}, {"zeta", &BasicRates<double>::zeta},
    {"beta1", &BasicRates<double>::beta1},   {"beta2", &BasicRates<double>::beta2},
    {"beta3", &BasicRates<double>::beta3},   {"sigma_vacc", &BasicRates<double>::sigma_vacc},
    {"gamma", &BasicRates<double>::gamma},   {"delta1", &BasicRates<double>::delta1},
    {"delta2", &BasicRates<double>::delta2}, {"delta3", &BasicRates<double>::delta3},
    {"p2", &BasicRates<double>::p2},         {"mu", &BasicRates<double>::mu},
};

} // namespace

nlohmann::json to_json(const EpidemicParams& p)
{
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& r : kRates) {
        doc[r.name] = p.*r.member;
    }
    doc["p1_intercept"] = p.hosp_link.intercept;
    doc["p1_slope"] = p.hosp_link.slope;
    return doc;
}

EpidemicParams params_from_json(const nlohmann::json& doc)
{
    EpidemicParams p;
    try {
        for (const auto& r : kRates) {
            p.*r.member = doc.at(r.name).get<double>();
        }
        p.hosp_link.intercept = doc.at("p1_intercept").get<double>();
        p.hosp_link.slope = doc.at("p1_slope").get<double>();
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed parameter set: ") + e.what());
    }
    validate(p);
    return p;
}

nlohmann::json to_json(const NoiseIntensities& z)
{
    nlohmann::json doc = nlohmann::json::object();
    for (std::size_t k = 0; k < kCompartments; ++k) {
        doc["sigma" + std::to_string(k + 1)] = z.sigma[k];
    }
    return doc;
}

NoiseIntensities noise_from_json(const nlohmann::json& doc)
{
    NoiseIntensities z;
    try {
        for (std::size_t k = 0; k < kCompartments; ++k) {
            z.sigma[k] = doc.at("sigma" + std::to_string(k + 1)).get<double>();
            if (!std::isfinite(z.sigma[k]) || z.sigma[k] < 0.0) {
                throw ConfigError("noise intensities must be finite and non-negative");
            }
        }
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed noise set: ") + e.what());
    }
    return z;
}

} // namespace vaxopt::epi
