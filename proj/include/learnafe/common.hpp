#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace learnafe {

inline constexpr std::size_t kNumChannels = 16;
inline constexpr std::size_t kNumClasses = 12;
inline constexpr double kSampleRate = 20000.0;
inline constexpr std::size_t kClipSamples = 20000;

/// Selects between the single-threaded and OpenMP code path of a kernel.
/// Both paths use the same per-element reduction order, so their results are
/// bitwise identical.
enum class Exec { Serial, Parallel };

// Error kinds raised across the library.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ConstraintViolation : std::domain_error {
  using std::domain_error::domain_error;
};
struct SingularFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AliasingError : std::domain_error {
  using std::domain_error::domain_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};
struct ModeError : std::logic_error {
  using std::logic_error::logic_error;
};
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Dense row-major 2-D array.
template <class T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Array2D&, const Array2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Collects the first exception raised inside an OpenMP region so it can be
/// rethrown after the region ends.
class ExceptionSlot {
 public:
  void capture() {
#pragma omp critical(learnafe_exception_slot)
    if (!first_) first_ = std::current_exception();
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::exception_ptr first_;
};

/// SplitMix64 finalizer; used to derive independent per-item seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (b + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return derive_seed(derive_seed(a, b), c);
}

}  // namespace learnafe
