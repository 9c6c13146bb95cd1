#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qdk {

struct MorseParams {
    double d_e = 0.0;
    double r_e = 0.0;
    double alf = 0.0;
};

struct MeckeParams {
    double q_0 = 0.0;
    double r_0 = 1.0;
};

/// Power-law absorber; `strength` multiplies the bare power.
struct PowerNipParams {
    double exp = 2.0;
    double min = 0.0;
    double max = 0.0;
    double strength = 1.0;
};

/// sum_k c_k (R - center)^k / k!
struct TaylorParams {
    std::vector<double> coeffs;
    double center = 0.0;
};

struct JahnTellerParams {
    double kappa = 0.0;
    double lam = 0.0;
};

/// Natural cubic spline through tabulated points.
class TabulatedFunction {
public:
    TabulatedFunction(std::vector<double> abscissae, std::vector<double> ordinates);
    /// Two-column whitespace-separated file, `#` starts a comment.
    static TabulatedFunction from_file(const std::filesystem::path& path);

    double operator()(double x) const;
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    const std::vector<double>& abscissae() const { return x_; }
    const std::vector<double>& ordinates() const { return y_; }

private:
    struct Spline;
    std::vector<double> x_, y_;
    std::shared_ptr<const Spline> spline_;
};

void validate(const MorseParams& p);
void validate(const MeckeParams& p);
void validate(const PowerNipParams& p);

double eval_morse(const MorseParams& p, double r);
double eval_mecke(const MeckeParams& p, double r);
double eval_power_nip(const PowerNipParams& p, double r);
double eval_taylor(std::span<const double> coeffs, double center, double r);
double eval_tabulated(const TabulatedFunction& tab, double r);
Eigen::Matrix2d eval_jahn_teller(const JahnTellerParams& p, double x, double y);

/// One-dimensional model function of a single coordinate.
using ScalarModel =
    std::variant<MorseParams, MeckeParams, PowerNipParams, TaylorParams, TabulatedFunction>;

double evaluate(const ScalarModel& model, double r);
std::string model_name(const ScalarModel& model);

} // namespace qdk
