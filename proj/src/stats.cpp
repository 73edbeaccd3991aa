#include "traitkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "traitkit/csv.hpp"
#include "traitkit/error.hpp"

namespace traitkit::stats {

namespace {

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median_of_sorted(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

double poly(const double* coeffs, int order, double x) {
  double result = coeffs[0];
  double p = x * coeffs[order - 1];
  for (int j = order - 2; j >= 1; --j) p = (p + coeffs[j]) * x;
  return result + p;
}

}  // namespace

Descriptives describe(const std::vector<double>& xs) {
  if (xs.empty()) throw DataError("describe: empty input");
  if (xs.size() < 2) throw DataError("describe: need at least 2 values");
  const std::size_t n = xs.size();
  Descriptives d;
  d.n = n;
  d.mean = mean_of(xs);
  d.sd = sample_sd(xs, d.mean);
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  d.median = median_of_sorted(sorted);
  d.min = sorted.front();
  d.max = sorted.back();
  if (n >= 3) {
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : xs) {
      const double c = x - d.mean;
      m2 += c * c;
      m3 += c * c * c;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 > 0.0) {
      const double g1 = m3 / std::pow(m2, 1.5);
      const double nn = static_cast<double>(n);
      d.skew = g1 * std::pow((nn - 1.0) / nn, 1.5);
    }
  }
  return d;
}

// --- normal distribution -----------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  // AS 241 algorithm PPND16 (Wichura 1988).
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  }
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3,  2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double dd[8] = {
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto ratio = [](const double* num, const double* den, double r) {
    double top = num[7];
    double bot = den[7];
    for (int i = 6; i >= 0; --i) {
      top = top * r + num[i];
      bot = bot * r + den[i];
    }
    return top / bot;
  };

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * ratio(a, b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    value = ratio(c, dd, r - 1.6);
  } else {
    value = ratio(e, f, r - 5.0);
  }
  return (q < 0.0) ? -value : value;
}

// --- incomplete beta and Student t -------------------------------------------

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("student_t_cdf: df must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
  return (t > 0.0) ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("student_t_quantile: p must be in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  // Bisection; the CDF is monotone and cheap.
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * std::max(1.0, std::fabs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

// --- Shapiro-Wilk (AS R94, Royston 1995; uncensored samples) ------------------

TestResult shapiro_wilk(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 3) throw DataError("shapiro_wilk: need at least 3 values");
  if (n > 5000) throw DataError("shapiro_wilk: n > 5000 unsupported");

  std::vector<double> x = xs;
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 0.0) || range < 1e-19) {
    throw DataError("shapiro_wilk: all values equal (zero range)");
  }

  static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
  static const double g[2] = {-2.273, 0.459};
  constexpr double kPi6 = 1.909859;   // 6/pi
  constexpr double kStqr = 1.047198;  // asin(sqrt(3/4))

  const std::size_t n2 = n / 2;
  std::vector<double> a(n2, 0.0);
  const double an = static_cast<double>(n);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    const double an25 = an + 0.25;
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= n2; ++i) {
      a[i - 1] = normal_quantile((static_cast<double>(i) - 0.375) / an25);
      summ2 += a[i - 1] * a[i - 1];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;
    std::size_t first_kept;
    double fac;
    if (n > 5) {
      first_kept = 2;
      const double a2 = -a[1] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[0] = a1;
      a[1] = a2;
    } else {
      first_kept = 1;
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
      a[0] = a1;
    }
    for (std::size_t i = first_kept; i < n2; ++i) a[i] = -a[i] / fac;
  }

  // W as the squared correlation between the order statistics and the
  // antisymmetric weight vector; computed on range-scaled data as in AS R94.
  std::vector<double> coeff(n, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t mirror = n - 1 - pos;
    if (pos < mirror) {
      coeff[pos] = -a[pos];
    } else if (pos > mirror) {
      coeff[pos] = a[mirror];
    }
  }
  double sa = 0.0;
  double sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += coeff[i];
    sx += x[i] / range;
  }
  sa /= an;
  sx /= an;
  double ssa = 0.0;
  double ssx = 0.0;
  double sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double asa = coeff[i] - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  double w = 1.0 - w1;
  w = std::min(1.0, std::max(0.0, w));

  double pw;
  if (n == 3) {
    pw = kPi6 * (std::asin(std::sqrt(w)) - kStqr);
    pw = std::min(1.0, std::max(0.0, pw));
  } else {
    const double y = std::log(w1);
    const double xx = std::log(an);
    double m;
    double s;
    if (n <= 11) {
      const double gamma = poly(g, 2, an);
      if (y >= gamma) {
        pw = 1e-19;  // W is at the top of its attainable range; p is effectively 0
        TestResult out;
        out.kind = TestKind::ShapiroWilk;
        out.statistic = w;
        out.p_value = pw;
        out.method = "AS R94";
        return out;
      }
      const double y2 = -std::log(gamma - y);
      m = poly(c3, 4, an);
      s = std::exp(poly(c4, 4, an));
      pw = 1.0 - normal_cdf((y2 - m) / s);
    } else {
      m = poly(c5, 4, xx);
      s = std::exp(poly(c6, 3, xx));
      pw = 1.0 - normal_cdf((y - m) / s);
    }
  }

  TestResult out;
  out.kind = TestKind::ShapiroWilk;
  out.statistic = w;
  out.p_value = std::min(1.0, std::max(0.0, pw));
  out.method = "AS R94";
  return out;
}

// --- two-sample t ------------------------------------------------------------

TestResult pooled_t_from_summary(std::size_t n1, double mean1, double sd1,
                                 std::size_t n2, double mean2, double sd2) {
  if (n1 < 2 || n2 < 2) throw DataError("pooled t: each group needs n >= 2");
  if (sd1 < 0.0 || sd2 < 0.0) throw DataError("pooled t: negative sd");
  if (sd1 == 0.0 && sd2 == 0.0) {
    throw DataError("pooled t: both groups have zero variance");
  }
  const double fn1 = static_cast<double>(n1);
  const double fn2 = static_cast<double>(n2);
  const double df = fn1 + fn2 - 2.0;
  const double pooled_var = ((fn1 - 1.0) * sd1 * sd1 + (fn2 - 1.0) * sd2 * sd2) / df;
  const double se = std::sqrt(pooled_var) * std::sqrt(1.0 / fn1 + 1.0 / fn2);
  if (!(se > 0.0)) throw DataError("pooled t: zero standard error");
  const double diff = mean1 - mean2;
  const double t = diff / se;
  const double p = 2.0 * (1.0 - student_t_cdf(std::fabs(t), df));
  const double tq = student_t_quantile(0.975, df);

  TestResult out;
  out.kind = TestKind::StudentT;
  out.statistic = t;
  out.df = df;
  out.p_value = std::min(1.0, p);
  out.effect_estimate = diff;
  out.se = se;
  out.ci95 = std::make_pair(diff - tq * se, diff + tq * se);
  out.method = "pooled variance";
  return out;
}

TestResult t_test(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2 || ys.size() < 2) throw DataError("t_test: each sample needs n >= 2");
  const double m1 = mean_of(xs);
  const double m2 = mean_of(ys);
  return pooled_t_from_summary(xs.size(), m1, sample_sd(xs, m1), ys.size(), m2,
                               sample_sd(ys, m2));
}

// --- Mann-Whitney U ------------------------------------------------------------

std::vector<std::uint64_t> mann_whitney_null_counts(std::size_t m, std::size_t n) {
  // f(u; m, n) = f(u - n; m - 1, n) + f(u; m, n - 1), f(0; 0, n) = f(0; m, 0) = 1.
  const std::size_t max_u = m * n;
  std::vector<std::vector<std::uint64_t>> table(m + 1,
                                                std::vector<std::uint64_t>(max_u + 1, 0));
  for (std::size_t mm = 0; mm <= m; ++mm) table[mm][0] = 1;  // f(0; mm, 0) = 1
  for (std::size_t nn = 1; nn <= n; ++nn) {
    for (std::size_t mm = 1; mm <= m; ++mm) {
      for (std::size_t u = max_u + 1; u-- > 0;) {
        const std::uint64_t from_left = (u >= nn) ? table[mm - 1][u - nn] : 0;
        table[mm][u] += from_left;
      }
    }
  }
  // After iterating nn up to n, table[m][u] holds f(u; m, n).
  return table[m];
}

namespace {

struct UStat {
  double u1 = 0.0;
  bool has_ties = false;
};

UStat u_statistic(const std::vector<double>& xs, const std::vector<double>& ys) {
  UStat s;
  for (double x : xs) {
    for (double y : ys) {
      if (x > y) {
        s.u1 += 1.0;
      } else if (x == y) {
        s.u1 += 0.5;
        s.has_ties = true;
      }
    }
  }
  // Ties within a sample also break the exact distribution.
  auto has_internal_ties = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };
  if (!s.has_ties) {
    s.has_ties = has_internal_ties(xs) || has_internal_ties(ys);
  }
  return s;
}

std::vector<double> pairwise_differences(const std::vector<double>& xs,
                                         const std::vector<double>& ys) {
  std::vector<double> diffs;
  diffs.reserve(xs.size() * ys.size());
  for (double x : xs) {
    for (double y : ys) diffs.push_back(x - y);
  }
  std::sort(diffs.begin(), diffs.end());
  return diffs;
}

}  // namespace

TestResult mann_whitney_u(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || ys.empty()) throw DataError("mann_whitney_u: empty sample");
  const std::size_t n1 = xs.size();
  const std::size_t n2 = ys.size();
  const double nn = static_cast<double>(n1 * n2);

  const UStat stat = u_statistic(xs, ys);
  const double u1 = stat.u1;
  const double u2 = nn - u1;
  const double u_min = std::min(u1, u2);

  TestResult out;
  out.kind = TestKind::MannWhitneyU;
  out.statistic = u_min;

  const std::vector<double> diffs = pairwise_differences(xs, ys);
  out.effect_estimate = (diffs.size() % 2 == 1)
                            ? diffs[diffs.size() / 2]
                            : (diffs[diffs.size() / 2 - 1] + diffs[diffs.size() / 2]) / 2.0;

  const bool exact = !stat.has_ties && (n1 + n2) <= 20;
  if (exact) {
    const auto counts = mann_whitney_null_counts(n1, n2);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const auto u_int = static_cast<std::size_t>(u_min);
    std::uint64_t tail = 0;
    for (std::size_t u = 0; u <= u_int; ++u) tail += counts[u];
    const std::uint64_t numer = std::min(2 * tail, total);
    out.exact_p_ratio = std::make_pair(numer, total);
    out.p_value = static_cast<double>(numer) / static_cast<double>(total);
    out.method = "exact";

    // CI at the exact critical rank: qu = min{u : P(U <= u) >= alpha/2}.
    std::uint64_t cum = 0;
    std::size_t qu = 0;
    for (std::size_t u = 0; u < counts.size(); ++u) {
      cum += counts[u];
      if (static_cast<double>(cum) >= 0.025 * static_cast<double>(total)) {
        qu = u;
        break;
      }
    }
    if (qu == 0) qu = 1;
    const std::size_t ql = n1 * n2 - qu;
    out.ci95 = std::make_pair(diffs[qu - 1], diffs[ql]);
  } else {
    // Normal approximation with tie correction and continuity correction.
    const double n_total = static_cast<double>(n1 + n2);
    std::vector<double> pooled;
    pooled.reserve(n1 + n2);
    pooled.insert(pooled.end(), xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
      std::size_t j = i;
      while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double mu = nn / 2.0;
    const double sigma2 =
        nn / 12.0 * ((n_total + 1.0) - tie_term / (n_total * (n_total - 1.0)));
    if (!(sigma2 > 0.0)) throw DataError("mann_whitney_u: degenerate (all values tied)");
    const double sigma = std::sqrt(sigma2);
    double z = u1 - mu;
    if (z > 0.0) {
      z -= 0.5;
    } else if (z < 0.0) {
      z += 0.5;
    }
    z /= sigma;
    out.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::fabs(z))));
    out.method = "normal approximation, tie-corrected, continuity-corrected";

    const double zq = normal_quantile(0.975);
    auto k = static_cast<std::int64_t>(std::floor(mu - zq * sigma));
    k = std::max<std::int64_t>(k, 0);
    const auto lo_idx = static_cast<std::size_t>(k);
    const std::size_t hi_idx = diffs.size() - 1 - static_cast<std::size_t>(k);
    out.ci95 = std::make_pair(diffs[std::min(lo_idx, diffs.size() - 1)],
                              diffs[std::min(hi_idx, diffs.size() - 1)]);
  }
  return out;
}

// --- learning-gain evaluation --------------------------------------------------

LearningOutcome make_outcome(std::string participant_id, Group group, double before,
                             double after) {
  if (!(before > 0.0)) throw DataError("outcome: before-test points must be > 0");
  if (after < 0.0) throw DataError("outcome: after-test points must be >= 0");
  LearningOutcome o;
  o.participant_id = std::move(participant_id);
  o.group = group;
  o.before = before;
  o.after = after;
  o.delta = (after - before) / before;
  return o;
}

std::vector<LearningOutcome> read_outcomes_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw DataError("outcomes CSV: missing header");
  csv::require_header(lines[0], "participant_id,group,before,after", "outcomes CSV");
  std::vector<LearningOutcome> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 4) {
      throw DataError("outcomes CSV line " + std::to_string(i + 1) + ": expected 4 fields");
    }
    Group g;
    if (f[1] == "Experiment") {
      g = Group::Experiment;
    } else if (f[1] == "Control") {
      g = Group::Control;
    } else {
      throw DataError("outcomes CSV line " + std::to_string(i + 1) + ": unknown group '" +
                      f[1] + "'");
    }
    out.push_back(make_outcome(f[0], g, parse_double(f[2], "before", i + 1),
                               parse_double(f[3], "after", i + 1)));
  }
  return out;
}

GroupComparison compare_groups(const std::vector<LearningOutcome>& outcomes,
                               NormalityScope scope) {
  std::vector<double> experiment;
  std::vector<double> control;
  for (const auto& o : outcomes) {
    (o.group == Group::Experiment ? experiment : control).push_back(o.delta);
  }
  if (experiment.empty() || control.empty()) {
    throw DataError("compare_groups: both groups must be non-empty");
  }

  GroupComparison cmp;
  cmp.experiment = describe(experiment);
  cmp.control = describe(control);

  std::vector<double> pooled = experiment;
  pooled.insert(pooled.end(), control.begin(), control.end());
  cmp.normality = shapiro_wilk(pooled);
  if (scope == NormalityScope::PerGroup) {
    cmp.normality_experiment = shapiro_wilk(experiment);
    cmp.normality_control = shapiro_wilk(control);
  }
  cmp.student_t = t_test(experiment, control);
  cmp.mann_whitney = mann_whitney_u(experiment, control);
  return cmp;
}

namespace {

std::string fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

void put_row(std::ostringstream& os, const std::vector<std::string>& cells,
             const std::vector<int>& widths) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << std::left << std::setw(widths[i]) << cells[i];
    if (i + 1 < cells.size()) os << "  ";
  }
  os << '\n';
}

}  // namespace

std::string render_report(const GroupComparison& cmp) {
  std::ostringstream os;
  os << "Group descriptives (delta)\n";
  const std::vector<int> w1 = {12, 4, 8, 8, 8, 8};
  put_row(os, {"Group", "N", "Mean", "Median", "SD", "SE"}, w1);
  for (const auto* d : {&cmp.experiment, &cmp.control}) {
    const bool is_exp = d == &cmp.experiment;
    const double se = d->sd / std::sqrt(static_cast<double>(d->n));
    put_row(os,
            {is_exp ? "Experiment" : "Control", std::to_string(d->n), fixed(d->mean, 3),
             fixed(d->median, 3), fixed(d->sd, 3), fixed(se, 4)},
            w1);
  }
  os << '\n';
  os << "Normality test (Shapiro-Wilk";
  os << (cmp.normality_experiment ? ", per group + pooled" : ", pooled deltas") << ")\n";
  const std::vector<int> w2 = {12, 8, 8};
  put_row(os, {"Sample", "W", "p"}, w2);
  put_row(os, {"pooled", fixed(cmp.normality.statistic, 3), fixed(cmp.normality.p_value, 3)},
          w2);
  if (cmp.normality_experiment) {
    put_row(os,
            {"Experiment", fixed(cmp.normality_experiment->statistic, 3),
             fixed(cmp.normality_experiment->p_value, 3)},
            w2);
    put_row(os,
            {"Control", fixed(cmp.normality_control->statistic, 3),
             fixed(cmp.normality_control->p_value, 3)},
            w2);
  }
  os << "Note. A low p-value suggests a violation of the assumption of normality\n\n";

  os << "Two-sample tests (delta)\n";
  const std::vector<int> w3 = {16, 10, 6, 7, 16, 14, 11, 11};
  put_row(os,
          {"Test", "Statistic", "df", "p", "Mean difference", "SE difference", "CI95 lower",
           "CI95 upper"},
          w3);
  const auto& t = cmp.student_t;
  put_row(os,
          {"Student's t", fixed(t.statistic, 2), fixed(*t.df, 1), fixed(t.p_value, 3),
           fixed(*t.effect_estimate, 3), fixed(*t.se, 4), fixed(t.ci95->first, 4),
           fixed(t.ci95->second, 3)},
          w3);
  const auto& u = cmp.mann_whitney;
  put_row(os,
          {"Mann-Whitney U", fixed(u.statistic, 2), "", fixed(u.p_value, 3),
           fixed(*u.effect_estimate, 3), "", fixed(u.ci95->first, 4),
           fixed(u.ci95->second, 3)},
          w3);
  if (u.method != "exact") {
    os << "Note. Mann-Whitney p used a " << u.method << " (exact distribution unavailable)\n";
  }
  return os.str();
}

namespace {

nlohmann::ordered_json descriptives_json(const Descriptives& d) {
  nlohmann::ordered_json j;
  j["n"] = d.n;
  j["mean"] = d.mean;
  j["sd"] = d.sd;
  j["se"] = d.sd / std::sqrt(static_cast<double>(d.n));
  j["median"] = d.median;
  j["min"] = d.min;
  j["max"] = d.max;
  if (d.skew) {
    j["skew"] = *d.skew;
  } else {
    j["skew"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json test_json(const TestResult& t) {
  nlohmann::ordered_json j;
  switch (t.kind) {
    case TestKind::ShapiroWilk: j["kind"] = "shapiro_wilk"; break;
    case TestKind::StudentT: j["kind"] = "student_t"; break;
    case TestKind::MannWhitneyU: j["kind"] = "mann_whitney_u"; break;
  }
  j["statistic"] = t.statistic;
  if (t.df) j["df"] = *t.df;
  j["p_value"] = t.p_value;
  if (t.effect_estimate) j["effect_estimate"] = *t.effect_estimate;
  if (t.se) j["se"] = *t.se;
  if (t.ci95) j["ci95"] = {t.ci95->first, t.ci95->second};
  if (t.exact_p_ratio) {
    j["exact_p_ratio"] = {t.exact_p_ratio->first, t.exact_p_ratio->second};
  }
  j["method"] = t.method;
  return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const GroupComparison& cmp) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["groups"]["Experiment"] = descriptives_json(cmp.experiment);
  j["groups"]["Control"] = descriptives_json(cmp.control);
  j["normality"] = test_json(cmp.normality);
  if (cmp.normality_experiment) {
    j["normality_experiment"] = test_json(*cmp.normality_experiment);
    j["normality_control"] = test_json(*cmp.normality_control);
  }
  j["student_t"] = test_json(cmp.student_t);
  j["mann_whitney"] = test_json(cmp.mann_whitney);
  return j;
}

}  // namespace traitkit::stats
