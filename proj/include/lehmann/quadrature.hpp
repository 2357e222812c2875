#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) quadrature on a finite
// interval. The Kronrod nodes are interior to every subinterval, so the
// integrand is never evaluated at a subdivision endpoint; in particular an
// integrand on (0, 1) is never called at 0 or 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "lehmann/errors.hpp"
#include "lehmann/numeric.hpp"

namespace lehmann {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_intervals = std::size_t{1} << 15;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  std::size_t evaluations = 0;
};

namespace detail {

// QUADPACK qk21 abscissae/weights. Odd entries of kXgk are the 10-point
// Gauss nodes, the last entry is the centre.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a;
  double b;
  double value;
  double error;
};

struct SegmentLess {
  bool operator()(const Segment& x, const Segment& y) const {
    return x.error < y.error;
  }
};

struct NonFiniteIntegrand {
  double x;
};

// Raised when a subinterval is too narrow for its nodes to stay interior.
struct UnresolvedInterval {
  double a;
  double b;
};

template <class F>
double checked_eval(F& f, double x, double a, double b) {
  if (!(x > a && x < b)) throw UnresolvedInterval{a, b};
  const double v = f(x);
  if (!std::isfinite(v)) throw NonFiniteIntegrand{x};
  return v;
}

template <class F>
Segment gauss_kronrod21(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 10> lo{};
  std::array<double, 10> hi{};
  const double fc = checked_eval(f, centre, a, b);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    lo[j] = checked_eval(f, centre - dx, a, b);
    hi[j] = checked_eval(f, centre + dx, a, b);
    const double sum = lo[j] + hi[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(lo[j]) + std::abs(hi[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(lo[j] - mean) + std::abs(hi[j] - mean));
  }
  const double width = std::abs(half);
  resasc *= width;
  resabs *= width;

  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return Segment{a, b, resk * half, err};
}

}  // namespace detail

// Integrates f over [a, b]. Throws NumericalFailure (carrying the best
// estimate) when the requested tolerance is not met within max_intervals
// subintervals, when a subinterval becomes too narrow to hold interior nodes,
// or when the integrand returns a non-finite value.
template <class F>
QuadratureResult integrate(F&& f, double a, double b,
                           const QuadratureOptions& opts = {}) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("quadrature: need finite a < b");
  }
  std::priority_queue<detail::Segment, std::vector<detail::Segment>,
                      detail::SegmentLess>
      heap;
  double total = std::numeric_limits<double>::quiet_NaN();
  double total_err = kInf;
  std::size_t evaluations = 21;
  try {
    heap.push(detail::gauss_kronrod21(f, a, b));
  } catch (const detail::NonFiniteIntegrand& bad) {
    throw NumericalFailure("quadrature: non-finite integrand value at x = " +
                               format_double(bad.x),
                           total, total_err);
  } catch (const detail::UnresolvedInterval&) {
    throw NumericalFailure("quadrature: interval too narrow to resolve", total,
                           total_err);
  }
  total = heap.top().value;
  total_err = heap.top().error;

  const auto tolerance = [&] {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  while (total_err > tolerance()) {
    const detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (heap.size() + 1 > opts.max_intervals || !(worst.a < mid) ||
        !(mid < worst.b)) {
      throw NumericalFailure(
          "quadrature: tolerance not reached after " +
              std::to_string(heap.size()) + " subintervals (error estimate " +
              format_double(total_err) + ")",
          total, total_err);
    }
    detail::Segment left{};
    detail::Segment right{};
    try {
      left = detail::gauss_kronrod21(f, worst.a, mid);
      right = detail::gauss_kronrod21(f, mid, worst.b);
    } catch (const detail::NonFiniteIntegrand& bad) {
      throw NumericalFailure("quadrature: non-finite integrand value at x = " +
                                 format_double(bad.x) + " after " +
                                 std::to_string(heap.size()) + " subintervals",
                             total, total_err);
    } catch (const detail::UnresolvedInterval& bad) {
      throw NumericalFailure("quadrature: subinterval [" + format_double(bad.a) +
                                 ", " + format_double(bad.b) +
                                 "] is below floating-point resolution (error "
                                 "estimate " + format_double(total_err) + ")",
                             total, total_err);
    }
    heap.pop();
    evaluations += 42;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum in ascending position to drop the running-update drift.
  std::vector<detail::Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(),
            [](const auto& x, const auto& y) { return x.a < y.a; });
  QuadratureResult out;
  for (const auto& s : segs) {
    out.value += s.value;
    out.error += s.error;
  }
  out.intervals = segs.size();
  out.evaluations = evaluations;
  return out;
}

}  // namespace lehmann
