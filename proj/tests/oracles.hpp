#pragma once

// Straightforward reference computations used to cross-check the library.
// Written independently of src/ and kept deliberately naive.

#include <cmath>
#include <set>
#include <vector>

namespace oracle {

inline double ps2(long pv, long lo, long hi) {
  if (pv > hi) return 1.0;
  if (pv < lo) return 0.0;
  long double frac = static_cast<long double>(pv - lo) / static_cast<long double>(hi - lo);
  return static_cast<double>(0.5L + 0.5L * frac);
}

inline double ps3(int cf) {
  long double p = 1.0L;
  for (int i = 0; i < cf; ++i) p *= 2.0L;
  return static_cast<double>(0.5L + 0.5L / p);
}

inline double geo_mean(const std::vector<double>& v) {
  long double log_sum = 0.0L;
  for (double x : v) {
    if (x == 0.0) return 0.0;
    log_sum += std::log(static_cast<long double>(x));
  }
  return static_cast<double>(std::exp(log_sum / v.size()));
}

// Two-pass Pearson correlation on column vectors.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline std::size_t distinct(const std::vector<double>& v) { return std::set<double>(v.begin(), v.end()).size(); }

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace oracle
