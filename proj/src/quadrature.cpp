#include "powerutil/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "powerutil/error.hpp"

namespace powerutil::quadrature {
namespace {

// Kronrod abscissae on [0, 1]; odd indices (1, 3, ..., 9) are the 10-point
// Gauss nodes.
constexpr std::array<double, 11> kNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();

enum class Map { identity, upper_tail, lower_tail };

struct Mapping {
  Map kind = Map::identity;
  double anchor = 0.0;
  double scale = 1.0;

  // Returns x(t) and writes dx/dt.
  double operator()(double t, double& jacobian) const {
    switch (kind) {
      case Map::identity:
        jacobian = 1.0;
        return t;
      case Map::upper_tail: {
        const double w = 1.0 - t;
        jacobian = scale / (w * w);
        return anchor + scale * t / w;
      }
      case Map::lower_tail: {
        const double w = 1.0 - t;
        jacobian = scale / (w * w);
        return anchor - scale * t / w;
      }
    }
    jacobian = 0.0;
    return 0.0;
  }
};

struct Panel {
  double a;
  double b;
  std::size_t mapping;
  double value;
  double error;
  double abs_value;
};

struct ByError {
  bool operator()(const Panel& lhs, const Panel& rhs) const { return lhs.error < rhs.error; }
};

double evaluate(const std::function<double(double)>& f, const Mapping& m, double t) {
  if (m.kind != Map::identity && !(t < 1.0)) return 0.0;
  double jac = 0.0;
  const double x = m(t, jac);
  const double fx = f(x);
  if (!std::isfinite(fx)) {
    std::ostringstream os;
    os << "integrate: integrand is not finite at x = " << x;
    throw Error(ErrorCode::quadrature_failure, os.str());
  }
  // The tail maps send t -> 1 to infinity; the integrand must vanish faster
  // than the Jacobian grows.
  return fx == 0.0 ? 0.0 : fx * jac;
}

Panel gauss_kronrod(const std::function<double(double)>& f, const Mapping& m,
                    std::size_t mapping_index, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = evaluate(f, m, center);
  double res_gauss = 0.0;
  double res_kronrod = kKronrodWeights[10] * fc;
  double res_abs = std::abs(res_kronrod);
  std::array<double, 10> f_lo{};
  std::array<double, 10> f_hi{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kNodes[j];
    f_lo[j] = evaluate(f, m, center - dx);
    f_hi[j] = evaluate(f, m, center + dx);
    const double sum = f_lo[j] + f_hi[j];
    res_kronrod += kKronrodWeights[j] * sum;
    res_abs += kKronrodWeights[j] * (std::abs(f_lo[j]) + std::abs(f_hi[j]));
    if (j % 2 == 1) res_gauss += kGaussWeights[j / 2] * sum;
  }
  const double mean = 0.5 * res_kronrod;
  double res_asc = kKronrodWeights[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    res_asc += kKronrodWeights[j] * (std::abs(f_lo[j] - mean) + std::abs(f_hi[j] - mean));
  }
  const double scale = std::abs(half);
  res_kronrod *= half;
  res_abs *= scale;
  res_asc *= scale;
  double err = std::abs((res_kronrod - res_gauss * half));
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * res_abs, err);
  }
  return Panel{a, b, mapping_index, res_kronrod, err, res_abs};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                 const Options& options) {
  require(breakpoints.size() >= 2, ErrorCode::invalid_argument,
          "integrate: need at least two breakpoints");
  std::vector<Mapping> mappings;
  std::priority_queue<Panel, std::vector<Panel>, ByError> queue;
  std::vector<Panel> frozen;

  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = breakpoints[i];
    const double hi = breakpoints[i + 1];
    require(!(hi < lo), ErrorCode::invalid_argument, "integrate: breakpoints must be sorted");
    if (lo == hi) continue;
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
      mappings.push_back({Map::lower_tail, 0.0, options.lower_tail_scale});
      queue.push(gauss_kronrod(f, mappings.back(), mappings.size() - 1, 0.0, 1.0));
      mappings.push_back({Map::upper_tail, 0.0, options.upper_tail_scale});
      queue.push(gauss_kronrod(f, mappings.back(), mappings.size() - 1, 0.0, 1.0));
    } else if (hi_inf) {
      mappings.push_back({Map::upper_tail, lo, options.upper_tail_scale});
      queue.push(gauss_kronrod(f, mappings.back(), mappings.size() - 1, 0.0, 1.0));
    } else if (lo_inf) {
      mappings.push_back({Map::lower_tail, hi, options.lower_tail_scale});
      queue.push(gauss_kronrod(f, mappings.back(), mappings.size() - 1, 0.0, 1.0));
    } else {
      mappings.push_back({Map::identity, 0.0, 1.0});
      queue.push(gauss_kronrod(f, mappings.back(), mappings.size() - 1, lo, hi));
    }
  }

  auto totals = [&](double& value, double& error, double& abs_value) {
    value = error = abs_value = 0.0;
    auto copy = queue;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      abs_value += copy.top().abs_value;
      copy.pop();
    }
    for (const auto& p : frozen) {
      value += p.value;
      error += p.error;
      abs_value += p.abs_value;
    }
  };

  double value = 0.0;
  double error = 0.0;
  double abs_value = 0.0;
  totals(value, error, abs_value);
  int panels = static_cast<int>(queue.size());

  auto tolerance = [&] {
    return std::max({options.abs_tol, options.rel_tol * std::abs(value), 100.0 * kEps * abs_value});
  };

  while (error > tolerance()) {
    if (queue.empty() || panels >= options.max_panels) {
      std::ostringstream os;
      os << "integrate: tolerance not met after " << panels << " panels (estimate " << value
         << ", error " << error << ")";
      throw Error(ErrorCode::quadrature_failure, os.str());
    }
    const Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 64.0 * kEps * std::abs(mid)) {
      frozen.push_back(worst);
      continue;
    }
    const Mapping& m = mappings[worst.mapping];
    const Panel left = gauss_kronrod(f, m, worst.mapping, worst.a, mid);
    const Panel right = gauss_kronrod(f, m, worst.mapping, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    abs_value += left.abs_value + right.abs_value - worst.abs_value;
    queue.push(left);
    queue.push(right);
    ++panels;
    // Running sums drift; resynchronise now and then.
    if (panels % 256 == 0) totals(value, error, abs_value);
  }
  totals(value, error, abs_value);
  return Result{value, error, panels};
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options) {
  if (a == b) return {};
  if (b < a) {
    Result r = integrate(f, b, a, options);
    r.value = -r.value;
    return r;
  }
  const std::array<double, 2> ends{a, b};
  return integrate(f, std::span<const double>(ends), options);
}

}  // namespace powerutil::quadrature
