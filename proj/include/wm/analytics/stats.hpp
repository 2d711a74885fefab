#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wm::analytics {

// Previously published review sample for 1,681 weaknesses. Reference only;
// the Cochran computation below gives 313.
inline constexpr std::size_t kReportedReviewSample = 318;

// Two-sided z score for 0.90, 0.95 or 0.99. Throws InvalidArgument otherwise.
double z_score(double confidence);

// Cochran's n0 = z^2 * 0.25 / margin^2, with the finite-population correction
// n0 / (1 + (n0 - 1) / N) when `population` is given; rounded up.
std::size_t cochran_sample_size(std::optional<std::size_t> population, double confidence,
                                double margin);

// Uniform sample without replacement of the size above, reproducible from
// `seed`. Output keeps the input order. Throws PopulationTooSmall when the
// sample would exceed the population.
std::vector<std::string> sample_for_review(const std::vector<std::string>& ids, double confidence,
                                           double margin, std::uint64_t seed);

// Throws LengthMismatch for lists of different (or zero) length.
double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct FiveNumber {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Quartiles by linear interpolation between order statistics (R type 7).
// All zeros when `values` is empty.
FiveNumber five_number(std::vector<double> values);

// Type-7 quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace wm::analytics
