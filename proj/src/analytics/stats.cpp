#include "wm/analytics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "wm/error.hpp"

namespace wm::analytics {

double z_score(double confidence) {
  if (std::abs(confidence - 0.90) < 1e-12) return 1.645;
  if (std::abs(confidence - 0.95) < 1e-12) return 1.96;
  if (std::abs(confidence - 0.99) < 1e-12) return 2.576;
  throw InvalidArgument(fmt::format("unsupported confidence level {}", confidence));
}

std::size_t cochran_sample_size(std::optional<std::size_t> population, double confidence,
                                double margin) {
  if (!(margin > 0.0 && margin <= 1.0))
    throw InvalidArgument(fmt::format("margin {} outside (0, 1]", margin));
  if (population && *population == 0) throw PopulationTooSmall("empty population");
  const double z = z_score(confidence);
  double n = z * z * 0.25 / (margin * margin);
  if (population) n = n / (1.0 + (n - 1.0) / static_cast<double>(*population));
  // The epsilon keeps exact integers such as 384.0000000001 from rounding up.
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n - 1e-9)));
}

std::vector<std::string> sample_for_review(const std::vector<std::string>& ids, double confidence,
                                           double margin, std::uint64_t seed) {
  const std::size_t n = cochran_sample_size(ids.size(), confidence, margin);
  if (n > ids.size())
    throw PopulationTooSmall(fmt::format("sample of {} exceeds population of {}", n, ids.size()));
  std::vector<std::string> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::sample(ids.begin(), ids.end(), std::back_inserter(out), n, rng);
  return out;
}

double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size() || a.empty())
    throw LengthMismatch(fmt::format("label lists of length {} and {}", a.size(), b.size()));
  const double n = static_cast<double>(a.size());
  std::map<std::string, double> ca, cb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : ca)
    if (auto it = cb.find(label); it != cb.end()) pe += (count / n) * (it->second / n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

FiveNumber five_number(std::vector<double> values) {
  FiveNumber f;
  f.n = values.size();
  if (values.empty()) return f;
  std::sort(values.begin(), values.end());
  f.min = values.front();
  f.q1 = quantile_sorted(values, 0.25);
  f.median = quantile_sorted(values, 0.5);
  f.q3 = quantile_sorted(values, 0.75);
  f.max = values.back();
  return f;
}

}  // namespace wm::analytics
