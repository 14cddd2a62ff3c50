#ifndef REX_COMMON_HPP
#define REX_COMMON_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rex {

// Error taxonomy mirrored by CLI exit codes: DataError -> 1, ConfigError -> 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file content (carries line/row context in the message).
class ParseError : public DataError {
 public:
  using ParseError::DataError::DataError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stand-in for -infinity in log-space scores. Finite so that sums of masked
// scores stay well-defined doubles instead of producing NaNs.
inline constexpr double kNegInf = -1e30;

inline bool is_effectively_neg_inf(double x) { return x < -1e29; }

// Deterministic random source. std::mt19937_64 has a pinned sequence by the
// standard; the scaling below avoids std::uniform_* distributions, whose
// output is implementation-defined and would break the byte-identical
// checkpoint contract across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n); n must be > 0
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = uniform_index(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform_index(v.size())];
  }

 private:
  std::mt19937_64 engine_;
};

double logsumexp(const std::vector<double>& xs);
double logsumexp3(double a, double b, double c);

std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64_file(const std::string& path);

// Exact round-trip float formatting ("%a"); checkpoints rely on it for the
// byte-identical determinism contract.
std::string to_hexfloat(double x);
double from_hexfloat(const std::string& s);

std::vector<std::string> split(std::string_view s, char delim);
std::vector<std::string> split_ws(std::string_view s);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

bool utf8_valid(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace rex

#endif  // REX_COMMON_HPP
