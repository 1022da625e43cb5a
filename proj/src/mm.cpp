#include "exidx/mm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "exidx/errors.hpp"
#include "exidx/rng.hpp"

namespace exidx {

namespace {

long long gcd_ll(long long a, long long b) {
  while (b != 0) {
    const long long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

}  // namespace

Frac::Frac(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("fraction denominator must be nonzero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num < 0) throw std::invalid_argument("signature coefficients must be nonnegative");
  const long long g = gcd_ll(num == 0 ? den : num, den);
  num /= g;
  den /= g;
  if (num == 0) den = 1;
}

bool Frac::operator<(const Frac& other) const {
  return static_cast<__int128>(num) * other.den < static_cast<__int128>(other.num) * den;
}

double MMSignature::Row::at(long offset) const {
  if (offset < min_offset || offset > max_offset) return 0.0;
  return alpha[static_cast<std::size_t>(offset - min_offset)];
}

MMSignature MMSignature::from_entries(std::vector<Entry> entries) {
  if (entries.empty()) throw std::invalid_argument("signature needs at least one coefficient");

  std::map<long, std::map<long, Entry>> grouped;
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.alpha >= 0.0) || !std::isfinite(e.alpha)) {
      throw std::invalid_argument("signature coefficients must be finite and nonnegative");
    }
    if (e.exact && std::abs(e.exact->value() - e.alpha) > 1e-12) {
      throw std::invalid_argument("exact fraction does not match coefficient value");
    }
    auto& row = grouped[e.row];
    if (row.count(e.offset)) {
      throw std::invalid_argument("duplicate signature entry for (l=" + std::to_string(e.row) +
                                  ", j=" + std::to_string(e.offset) + ")");
    }
    row[e.offset] = e;
    total += e.alpha;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("signature coefficients must sum to 1 (got " +
                                std::to_string(total) + ")");
  }

  MMSignature sig;
  sig.total_ = total;
  for (auto& [label, row_entries] : grouped) {
    // Drop zero coefficients from the support.
    long lo = 0, hi = 0;
    bool any = false;
    for (const auto& [offset, e] : row_entries) {
      if (e.alpha > 0.0) {
        if (!any) {
          lo = hi = offset;
          any = true;
        } else {
          lo = std::min(lo, offset);
          hi = std::max(hi, offset);
        }
      }
    }
    if (!any) continue;  // all-zero row carries no dependence

    Row row;
    row.label = label;
    row.min_offset = lo;
    row.max_offset = hi;
    row.alpha.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    row.exact.assign(row.alpha.size(), std::nullopt);
    row.all_exact = true;
    for (const auto& [offset, e] : row_entries) {
      if (offset < lo || offset > hi) continue;
      const auto idx = static_cast<std::size_t>(offset - lo);
      row.alpha[idx] = e.alpha;
      row.exact[idx] = e.exact;
      if (!e.exact) row.all_exact = false;
    }
    // Interior zeros without an explicit entry still compare exactly.
    for (std::size_t i = 0; i < row.alpha.size(); ++i) {
      if (!row.exact[i] && row.alpha[i] == 0.0) row.exact[i] = Frac(0, 1);
    }
    row.all_exact = std::all_of(row.exact.begin(), row.exact.end(),
                                [](const std::optional<Frac>& f) { return f.has_value(); });
    sig.rows_.push_back(std::move(row));
  }
  if (sig.rows_.empty()) throw std::invalid_argument("signature has no positive coefficient");
  return sig;
}

MMSignature MMSignature::single_row(const std::vector<double>& alphas, long first_offset) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    entries.push_back({1, first_offset + static_cast<long>(i), alphas[i], std::nullopt});
  }
  return from_entries(std::move(entries));
}

MMSignature MMSignature::single_row(const std::vector<Frac>& alphas, long first_offset) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    entries.push_back({1, first_offset + static_cast<long>(i), alphas[i].value(), alphas[i]});
  }
  return from_entries(std::move(entries));
}

namespace {

// Parses "0.25" or "1/4"; returns value plus the exact form when fractional.
std::pair<double, std::optional<Frac>> parse_alpha(const std::string& token, std::size_t row_no) {
  const auto slash = token.find('/');
  if (slash != std::string::npos) {
    try {
      const long long num = std::stoll(token.substr(0, slash));
      const long long den = std::stoll(token.substr(slash + 1));
      Frac f(num, den);
      return {f.value(), f};
    } catch (const std::exception&) {
      throw DataError("cannot parse fraction '" + token + "'", row_no);
    }
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing characters");
    return {v, std::nullopt};
  } catch (const std::exception&) {
    throw DataError("cannot parse coefficient '" + token + "'", row_no);
  }
}

}  // namespace

MMSignature MMSignature::parse(std::istream& in) {
  std::vector<Entry> entries;
  std::string line;
  std::size_t row_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string l_tok, j_tok, a_tok;
    if (!(fields >> l_tok)) continue;  // blank line
    if (!(fields >> j_tok >> a_tok)) throw DataError("expected 'l j alpha'", row_no);
    std::string extra;
    if (fields >> extra) throw DataError("trailing field '" + extra + "'", row_no);

    if (header_allowed && l_tok == "l" && j_tok == "j" && a_tok == "alpha") {
      header_allowed = false;
      continue;
    }
    header_allowed = false;
    Entry e;
    try {
      e.row = std::stol(l_tok);
      e.offset = std::stol(j_tok);
    } catch (const std::exception&) {
      throw DataError("cannot parse row/offset in '" + line + "'", row_no);
    }
    const auto [value, exact] = parse_alpha(a_tok, row_no);
    e.alpha = value;
    e.exact = exact;
    entries.push_back(e);
  }
  if (entries.empty()) throw DataError("signature file has no coefficient lines");
  try {
    return from_entries(std::move(entries));
  } catch (const std::invalid_argument& err) {
    throw DataError(err.what());
  }
}

MMSignature MMSignature::parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

MMSignature MMSignature::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open signature file: " + path);
  return parse(in);
}

std::string MMSignature::serialize() const {
  std::ostringstream out;
  out << "l j alpha\n";
  for (const auto& row : rows_) {
    for (long j = row.min_offset; j <= row.max_offset; ++j) {
      const auto idx = static_cast<std::size_t>(j - row.min_offset);
      if (row.alpha[idx] == 0.0) continue;
      out << row.label << ' ' << j << ' ';
      if (row.exact[idx]) {
        out << row.exact[idx]->num << '/' << row.exact[idx]->den;
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", row.alpha[idx]);
        out << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

long MMSignature::max_row_width() const {
  long width = 0;
  for (const auto& row : rows_) width = std::max(width, row.width());
  return width;
}

namespace {

// Exact evaluation of the order-k inequality on one row at offset j.
// Uses rationals when the whole row is exact, doubles with 1e-12 slack
// otherwise.
bool row_holds_at(const MMSignature::Row& row, int k, long j, double* lhs_out, double* rhs_out) {
  const long lo = row.min_offset;
  const long hi = row.max_offset;

  auto max_alpha = [&](long from, long to, double& out_val, Frac& out_frac) {
    out_val = 0.0;
    out_frac = Frac(0, 1);
    for (long t = std::max(from, lo); t <= std::min(to, hi); ++t) {
      const auto idx = static_cast<std::size_t>(t - lo);
      if (row.alpha[idx] > out_val) out_val = row.alpha[idx];
      if (row.all_exact && out_frac < *row.exact[idx]) out_frac = *row.exact[idx];
    }
  };

  const double a_j = row.at(j);
  double tail_val, window_val;
  Frac tail_frac, window_frac;
  max_alpha(j + k, hi, tail_val, tail_frac);            // s >= k+1 -> offsets >= j+k
  max_alpha(j + 1, j + k - 1, window_val, window_frac); // s = 2..k

  const double lhs = std::min(a_j, tail_val);
  if (lhs_out) *lhs_out = lhs;
  if (rhs_out) *rhs_out = window_val;

  if (row.all_exact) {
    const auto idx = static_cast<std::size_t>(j - lo);
    const Frac a_frac = (j >= lo && j <= hi) ? *row.exact[idx] : Frac(0, 1);
    const Frac lhs_frac = a_frac < tail_frac ? a_frac : tail_frac;
    return lhs_frac <= window_frac;
  }
  return lhs <= window_val + 1e-12;
}

}  // namespace

DkCheckResult mm_check_dk(const MMSignature& sig, int k) {
  if (k < 1) throw std::invalid_argument("dependence order k must be at least 1");

  DkCheckResult result;
  result.holds = true;

  if (k == 1) {
    for (const auto& row : sig.rows()) {
      long positive = 0;
      long second_offset = 0;
      for (long j = row.min_offset; j <= row.max_offset; ++j) {
        if (row.at(j) > 0.0) {
          ++positive;
          if (positive == 2) second_offset = j;
        }
      }
      if (positive > 1) {
        result.holds = false;
        result.witness = DkWitness{row.label, second_offset, row.at(second_offset), 0.0};
        return result;
      }
    }
    return result;
  }

  for (const auto& row : sig.rows()) {
    // Outside the support both sides vanish, so scanning it is exhaustive.
    for (long j = row.min_offset; j <= row.max_offset; ++j) {
      double lhs = 0.0, rhs = 0.0;
      if (!row_holds_at(row, k, j, &lhs, &rhs)) {
        result.holds = false;
        result.witness = DkWitness{row.label, j, lhs, rhs};
        return result;
      }
    }
  }
  return result;
}

std::optional<int> mm_min_k(const MMSignature& sig, int k_max) {
  if (k_max < 1) throw std::invalid_argument("mm_min_k requires k_max >= 1");
  for (int k = 1; k <= k_max; ++k) {
    if (mm_check_dk(sig, k).holds) return k;
  }
  if (k_max >= sig.max_row_width() + 1) {
    // The condition always holds once k exceeds the widest row.
    throw std::logic_error("no dependence order found despite k_max exceeding support width");
  }
  return std::nullopt;
}

double mm_extremal_index(const MMSignature& sig) {
  double theta = 0.0;
  for (const auto& row : sig.rows()) {
    theta += *std::max_element(row.alpha.begin(), row.alpha.end());
  }
  return theta;
}

Series mm_simulate(const MMSignature& sig, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulation length must be positive");

  std::vector<double> x(n, 0.0);
  std::uint64_t stream = 0;
  for (const auto& row : sig.rows()) {
    // Y_{l,t-j} for t in 1..n and j in the row support: indices
    // 1-max_offset .. n-min_offset, generated as one contiguous block.
    const auto span = static_cast<std::size_t>(static_cast<long>(n) - row.min_offset -
                                               (1 - row.max_offset) + 1);
    Rng rng(seed, stream++);
    std::vector<double> innovations(span);
    for (auto& y : innovations) y = rng.unit_frechet();

    for (std::size_t t = 0; t < n; ++t) {
      for (long j = row.min_offset; j <= row.max_offset; ++j) {
        const double a = row.at(j);
        if (a <= 0.0) continue;
        // innovation index (t+1) - j relative to base 1 - max_offset
        const auto idx = static_cast<std::size_t>(static_cast<long>(t + 1) - j -
                                                  (1 - row.max_offset));
        x[t] = std::max(x[t], a * innovations[idx]);
      }
    }
  }
  return Series(std::move(x));
}

}  // namespace exidx
