#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortex {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

enum class Side { Minus = 0, Plus = 1 };

inline Side other(Side s) { return s == Side::Minus ? Side::Plus : Side::Minus; }

/// Container holding one object per side of the front.
template <class T>
struct TwoSided {
  T minus{};
  T plus{};

  T& operator[](Side s) { return s == Side::Minus ? minus : plus; }
  const T& operator[](Side s) const { return s == Side::Minus ? minus : plus; }
};

/// Node set split at an interior interface. Both sides carry their own copy of
/// the interface node so that one-sided limits of discontinuous fields can be
/// stored without ambiguity.
struct TwoSidedGrid {
  std::vector<double> minus;  // ascending, minus.back() == interface
  std::vector<double> plus;   // ascending, plus.front() == interface

  double left() const { return minus.front(); }
  double right() const { return plus.back(); }
  double interface() const { return minus.back(); }
  const std::vector<double>& nodes(Side s) const { return s == Side::Minus ? minus : plus; }
  std::size_t size(Side s) const { return nodes(s).size(); }
};

/// Uniform two-sided grid with n_minus (resp. n_plus) cells per side.
TwoSidedGrid make_two_sided_grid(double left, double interface, double right,
                                 std::size_t n_minus, std::size_t n_plus);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested resolution or budget cannot honor a documented guarantee.
struct FeasibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Breakdown during time integration (vacuum, CFL violation, runaway front...).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vortex
