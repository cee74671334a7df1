#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace nnts {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Reduces x into [0, 2*pi). Values landing exactly on 2*pi map to 0.
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

enum class SourceUnit { radians, degrees, hours24 };

/// A sample of circular observations, stored in radians on [0, 2*pi).
/// Angles are wrapped on construction; the original unit and source file
/// are kept as provenance only.
class AngleSample {
 public:
  AngleSample(std::vector<double> angles_rad, SourceUnit unit = SourceUnit::radians,
              std::string source = {});

  const std::vector<double>& angles() const { return angles_; }
  std::size_t size() const { return angles_.size(); }
  SourceUnit source_unit() const { return unit_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<double> angles_;
  SourceUnit unit_;
  std::string source_;
};

}  // namespace nnts
