#ifndef KFADING_DETAIL_QUADRATURE_HPP
#define KFADING_DETAIL_QUADRATURE_HPP

// Adaptive Gauss-Kronrod 15(7) integration on finite intervals, plus a
// rational map for [0, inf).

#include <cmath>
#include <cstddef>
#include <utility>

namespace kfading {
namespace detail {

// Kronrod-15 nodes/weights on [-1,1] (positive half; node 0 included once)
inline constexpr double gk15_x[8] = {
    0.0,
    0.2077849550078984676006894037732449,
    0.4058451513773971669066064120769615,
    0.5860872354676911302941448382587296,
    0.7415311855993944398638647732807884,
    0.8648644233597690727897127886409262,
    0.9491079123427585245261896840478513,
    0.9914553711208126392068546975263285};
inline constexpr double gk15_wk[8] = {
    0.2094821410847278280129991748917143,
    0.2044329400752988924141619992346491,
    0.1903505780647854099132564024210137,
    0.1690047266392679028265834265985503,
    0.1406532597155259187451895905102379,
    0.1047900103222501838398763225415180,
    0.0630920926299785532907006631892043,
    0.0229353220105292249637320080589695};
inline constexpr double gk15_wg[4] = {  // Gauss-7 weights for nodes 0,2,4,6
    0.4179591836734693877551020408163265,
    0.3818300505051189449503697754889751,
    0.2797053914892766679014677714237796,
    0.1294849661688696932706114326790820};

template <class F>
std::pair<double, double> gk15(const F& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resk = gk15_wk[0] * fc, resg = gk15_wg[0] * fc;
  for (int j = 1; j < 8; ++j) {
    double fv = f(c - h * gk15_x[j]) + f(c + h * gk15_x[j]);
    resk += gk15_wk[j] * fv;
    if (!(j & 1)) resg += gk15_wg[j / 2] * fv;
  }
  double err = std::fabs((resk - resg) * h);
  return {resk * h, err};
}

struct QuadResult {
  double value = 0.0;
  double est_error = 0.0;
  bool converged = true;
};

template <class F>
QuadResult integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                     double rel_tol = 1e-12, int max_depth = 48) {
  struct Seg { double a, b, val, err; int depth; };
  auto [v0, e0] = gk15(f, a, b);
  // simple worklist: always split the worst segment; totals re-summed from
  // the segment list so one ill-behaved panel cannot poison the running sums
  Seg segs[512];
  int n = 1;
  segs[0] = {a, b, v0, e0, 0};
  double total = v0, total_err = e0;
  for (int iter = 0; iter < 2000; ++iter) {
    total = 0.0;
    total_err = 0.0;
    for (int i = 0; i < n; ++i) {
      total += segs[i].val;
      total_err += segs[i].err;
    }
    double tol = abs_tol > rel_tol * std::fabs(total) ? abs_tol : rel_tol * std::fabs(total);
    if (total_err <= tol) break;
    int worst = 0;
    for (int i = 1; i < n; ++i)
      if (segs[i].err > segs[worst].err) worst = i;
    Seg s = segs[worst];
    if (s.depth >= max_depth || n >= 511) return {total, total_err, false};
    double m = 0.5 * (s.a + s.b);
    auto [vl, el] = gk15(f, s.a, m);
    auto [vr, er] = gk15(f, m, s.b);
    segs[worst] = {s.a, m, vl, el, s.depth + 1};
    segs[n++] = {m, s.b, vr, er, s.depth + 1};
  }
  return {total, total_err, true};
}

// integral over [0, inf) via x = t/(1-t)
template <class F>
QuadResult integrate_half_line(const F& f, double abs_tol = 1e-12,
                               double rel_tol = 1e-12) {
  auto g = [&f](double t) {
    double u = 1.0 - t;
    double x = t / u;
    double fx = f(x);
    return fx == 0.0 ? 0.0 : fx / (u * u);
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol);
}

}  // namespace detail
}  // namespace kfading

#endif
