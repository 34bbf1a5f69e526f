#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mbg/errors.hpp"

// The generator h: pointwise evaluation plus the normalized Taylor
// coefficient stream a_t = h^{(t)}(0)/t!. Coefficients are supplied
// analytically; differentiating a black-box h numerically is not offered,
// it is too ill-conditioned past t ~ 10 for the series accuracy needed here.

namespace mbg {

class GeneratorH {
 public:
  using EvalFn = std::function<double(double)>;
  using CoeffFn = std::function<double(int)>;

  GeneratorH() = default;

  GeneratorH(std::string label, EvalFn eval, CoeffFn coeff,
             std::pair<double, double> positivity_domain =
                 {-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()})
      : label_(std::move(label)),
        eval_(std::move(eval)),
        coeff_(std::move(coeff)),
        positivity_domain_(positivity_domain) {}

  double operator()(double x) const { return eval_(x); }
  double eval(double x) const { return eval_(x); }
  double coeff(int t) const { return t < 0 ? 0.0 : coeff_(t); }
  const std::string& label() const { return label_; }
  const std::pair<double, double>& positivity_domain() const { return positivity_domain_; }

  // --- builtins -----------------------------------------------------------

  static GeneratorH exp_neg() {
    return GeneratorH(
        "exp-neg", [](double x) { return std::exp(-x); },
        [](int t) {
          double c = 1.0;
          for (int j = 1; j <= t; ++j) c *= -1.0 / j;
          return c;
        });
  }

  static GeneratorH exp_pos() {
    return GeneratorH(
        "exp-pos", [](double x) { return std::exp(x); },
        [](int t) {
          double c = 1.0;
          for (int j = 1; j <= t; ++j) c /= j;
          return c;
        });
  }

  static GeneratorH one() {
    return GeneratorH(
        "one", [](double) { return 1.0; }, [](int t) { return t == 0 ? 1.0 : 0.0; });
  }

  // h(x) = (1+x)^{-p}; the binomial series only converges for |x| < 1, so the
  // positivity domain is declared accordingly.
  static GeneratorH geometric(double p) {
    if (!(p > 0.0)) throw domain_error("geometric generator requires p > 0");
    return GeneratorH(
        "geom:" + format_double(p),
        [p](double x) { return std::pow(1.0 + x, -p); },
        [p](int t) {
          double c = 1.0;
          for (int j = 0; j < t; ++j) c *= -(p + j) / (j + 1);
          return c;
        },
        {-1.0, 1.0});
  }

  static GeneratorH polynomial(std::vector<double> c) {
    if (c.empty()) throw domain_error("polynomial generator needs coefficients");
    std::string label = "poly:";
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) label += ",";
      label += format_double(c[i]);
    }
    auto coef = c;
    return GeneratorH(
        label,
        [coef](double x) {
          double v = 0.0;
          for (std::size_t i = coef.size(); i-- > 0;) v = v * x + coef[i];
          return v;
        },
        [coef](int t) {
          return t < static_cast<int>(coef.size()) ? coef[static_cast<std::size_t>(t)] : 0.0;
        });
  }

 private:
  static std::string format_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

  std::string label_;
  EvalFn eval_;
  CoeffFn coeff_;
  std::pair<double, double> positivity_domain_;
};

// Coefficients of u = h^nu through degree T, by the power-of-a-series
// recurrence  u_t = (1/(t a_0)) sum_{j=1..t} (j nu - t + j) a_j u_{t-j}.
// Requires h(0) = a_0 != 0.
inline std::vector<double> power_coeffs(const GeneratorH& h, double nu, int truncation) {
  if (truncation < 0) throw domain_error("power_coeffs: negative truncation");
  const double a0 = h.coeff(0);
  if (a0 == 0.0)
    throw domain_error("generator vanishes at origin; Renyi series unavailable");
  std::vector<double> u(static_cast<std::size_t>(truncation) + 1, 0.0);
  u[0] = std::pow(a0, nu);
  for (int t = 1; t <= truncation; ++t) {
    double s = 0.0;
    for (int j = 1; j <= t; ++j)
      s += (j * nu - t + j) * h.coeff(j) * u[static_cast<std::size_t>(t - j)];
    u[static_cast<std::size_t>(t)] = s / (t * a0);
  }
  return u;
}

// |h(x) - sum_{t<=T} a_t x^t|: how much of h the degree-T truncation misses
// at the argument x.
inline double taylor_tail_probe(const GeneratorH& h, double x, int truncation) {
  double sum = 0.0, xt = 1.0;
  for (int t = 0; t <= truncation; ++t) {
    sum += h.coeff(t) * xt;
    xt *= x;
  }
  return std::abs(h.eval(x) - sum);
}

// CLI-facing generator strings: exp-neg | one | poly:c0,c1,... | geom:p
inline GeneratorH parse_generator(const std::string& spec) {
  if (spec == "exp-neg") return GeneratorH::exp_neg();
  if (spec == "one") return GeneratorH::one();
  if (spec.rfind("poly:", 0) == 0) {
    std::vector<double> c;
    std::stringstream ss(spec.substr(5));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t pos = 0;
        c.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw schema_error("bad polynomial coefficient '" + tok + "' in generator spec");
      }
    }
    if (c.empty()) throw schema_error("empty polynomial generator spec");
    return GeneratorH::polynomial(c);
  }
  if (spec.rfind("geom:", 0) == 0) {
    try {
      std::size_t pos = 0;
      const std::string body = spec.substr(5);
      const double p = std::stod(body, &pos);
      if (pos != body.size()) throw std::invalid_argument(body);
      return GeneratorH::geometric(p);
    } catch (const domain_error&) {
      throw;
    } catch (const std::exception&) {
      throw schema_error("bad geometric parameter in generator spec '" + spec + "'");
    }
  }
  throw schema_error("unknown generator spec '" + spec + "'");
}

}  // namespace mbg
