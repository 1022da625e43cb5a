#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exidx/series.hpp"

namespace exidx {

// Nonnegative rational, kept in lowest terms. Signature coefficients entered
// as fractions keep their exact form so the dependence checks can compare
// without floating-point slack.
struct Frac {
  long long num = 0;
  long long den = 1;

  Frac() = default;
  Frac(long long n, long long d);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Frac& other) const { return num == other.num && den == other.den; }
  bool operator<(const Frac& other) const;
  bool operator<=(const Frac& other) const { return *this < other || *this == other; }
};

// Finite signature of a moving-maxima process: coefficients alpha_{l,j} >= 0
// over rows l with integer offsets j, summing to one.
class MMSignature {
 public:
  struct Entry {
    long row = 1;      // l
    long offset = 0;   // j (may be negative)
    double alpha = 0.0;
    std::optional<Frac> exact;
  };

  struct Row {
    long label = 1;
    long min_offset = 0;
    long max_offset = 0;
    std::vector<double> alpha;                // dense over [min_offset, max_offset]
    std::vector<std::optional<Frac>> exact;   // parallel to alpha
    bool all_exact = false;

    double at(long offset) const;
    long width() const { return max_offset - min_offset + 1; }
  };

  static MMSignature from_entries(std::vector<Entry> entries);
  // Single row with consecutive offsets first_offset, first_offset+1, ...
  static MMSignature single_row(const std::vector<double>& alphas, long first_offset = 0);
  static MMSignature single_row(const std::vector<Frac>& alphas, long first_offset = 0);

  // Text form: optional '# ...' comments, an optional "l j alpha" header line,
  // then one "l j alpha" triple per line; alpha accepts decimals or "p/q".
  static MMSignature parse(std::istream& in);
  static MMSignature parse_text(const std::string& text);
  static MMSignature load(const std::string& path);
  std::string serialize() const;

  const std::vector<Row>& rows() const noexcept { return rows_; }
  double total() const noexcept { return total_; }
  long max_row_width() const;

 private:
  std::vector<Row> rows_;
  double total_ = 0.0;
};

struct DkWitness {
  long row = 0;     // l
  long offset = 0;  // j where the inequality fails
  double lhs = 0.0;
  double rhs = 0.0;
};

struct DkCheckResult {
  bool holds = false;
  std::optional<DkWitness> witness;  // set when holds is false
};

// Exact decision of the local dependence condition of order k for the
// signature: for k >= 2, alpha_{l,j} min (max over s >= k+1 of
// alpha_{l,j+s-1}) <= max over s = 2..k of alpha_{l,j+s-1} for every (l,j);
// for k = 1, every row carries exactly one positive coefficient.
DkCheckResult mm_check_dk(const MMSignature& sig, int k);

// Smallest k <= k_max for which the condition holds.
std::optional<int> mm_min_k(const MMSignature& sig, int k_max);

// Closed form: sum over rows of the row's largest coefficient.
double mm_extremal_index(const MMSignature& sig);

// X_t = max over (l,j) of alpha_{l,j} * Y_{l,t-j} with i.i.d. unit Frechet
// innovations; deterministic given the seed.
Series mm_simulate(const MMSignature& sig, std::size_t n, std::uint64_t seed);

}  // namespace exidx
