#include "qdynkit/operators.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include "qdynkit/error.hpp"

namespace qdk {

struct TabulatedFunction::Spline {
    gsl_spline* s = nullptr;
    ~Spline() {
        if (s) gsl_spline_free(s);
    }
};

TabulatedFunction::TabulatedFunction(std::vector<double> abscissae, std::vector<double> ordinates)
    : x_(std::move(abscissae)), y_(std::move(ordinates)) {
    if (x_.size() != y_.size())
        throw ConfigError("table: abscissae and ordinates differ in length");
    if (x_.size() < 2) throw ConfigError("table: at least two points are required");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1]))
            throw ConfigError("table: abscissae must be strictly increasing (entry " +
                              std::to_string(i + 1) + ")");
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });
    // Natural boundary conditions; GSL needs three points for cspline.
    auto sp = std::make_shared<Spline>();
    const gsl_interp_type* type = x_.size() >= 3 ? gsl_interp_cspline : gsl_interp_linear;
    sp->s = gsl_spline_alloc(type, x_.size());
    gsl_spline_init(sp->s, x_.data(), y_.data(), x_.size());
    spline_ = std::move(sp);
}

TabulatedFunction TabulatedFunction::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open table file " + path.string());
    std::vector<double> x, y;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a)) continue;
        std::string rest;
        if (!(ls >> b) || (ls >> rest))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected two numeric columns");
        x.push_back(a);
        y.push_back(b);
    }
    try {
        return TabulatedFunction(std::move(x), std::move(y));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

double TabulatedFunction::operator()(double x) const {
    if (!(x >= x_.front() && x <= x_.back()))
        throw RangeError("table argument " + std::to_string(x) + " outside [" +
                         std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
    double v = 0.0;
    if (gsl_spline_eval_e(spline_->s, x, nullptr, &v) != GSL_SUCCESS)
        throw RangeError("spline evaluation failed at " + std::to_string(x));
    return v;
}

void validate(const MorseParams& p) {
    if (!(p.d_e > 0.0)) throw ConfigError("morse.d_e: must be positive");
    if (!(p.alf > 0.0)) throw ConfigError("morse.alf: must be positive");
}

void validate(const MeckeParams& p) {
    if (!(p.r_0 > 0.0)) throw ConfigError("mecke.r_0: must be positive");
}

void validate(const PowerNipParams& p) {
    if (!(p.exp > 0.0)) throw ConfigError("power.exp: must be positive");
    if (!(p.min < p.max)) throw ConfigError("power.min: must be below power.max");
    if (!(p.strength >= 0.0)) throw ConfigError("power.strength: must be nonnegative");
}

double eval_morse(const MorseParams& p, double r) {
    const double e = 1.0 - std::exp(-p.alf * (r - p.r_e));
    return p.d_e * e * e;
}

double eval_mecke(const MeckeParams& p, double r) { return p.q_0 * r * std::exp(-r / p.r_0); }

double eval_power_nip(const PowerNipParams& p, double r) {
    if (r < p.min) return p.strength * std::pow(p.min - r, p.exp);
    if (r > p.max) return p.strength * std::pow(r - p.max, p.exp);
    return 0.0;
}

double eval_taylor(std::span<const double> coeffs, double center, double r) {
    // Horner on c_k / k!
    double acc = 0.0;
    const double d = r - center;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = coeffs[k] + acc * d / static_cast<double>(k + 1);
    return acc;
}

double eval_tabulated(const TabulatedFunction& tab, double r) { return tab(r); }

Eigen::Matrix2d eval_jahn_teller(const JahnTellerParams& p, double x, double y) {
    Eigen::Matrix2d m;
    m << p.kappa * x, p.lam * y, p.lam * y, -p.kappa * x;
    return m;
}

double evaluate(const ScalarModel& model, double r) {
    struct Visitor {
        double r;
        double operator()(const MorseParams& p) const { return eval_morse(p, r); }
        double operator()(const MeckeParams& p) const { return eval_mecke(p, r); }
        double operator()(const PowerNipParams& p) const { return eval_power_nip(p, r); }
        double operator()(const TaylorParams& p) const { return eval_taylor(p.coeffs, p.center, r); }
        double operator()(const TabulatedFunction& t) const { return t(r); }
    };
    return std::visit(Visitor{r}, model);
}

std::string model_name(const ScalarModel& model) {
    static const char* names[] = {"morse", "mecke", "power", "taylor", "table"};
    return names[model.index()];
}

} // namespace qdk
