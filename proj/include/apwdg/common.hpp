#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace apwdg {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Error kinds double as the C API status codes; exit codes are derived in error_category().
enum class ErrorCode {
  ConfigParse,
  OverlappingSpheres,
  SphereOutsideCell,
  InvalidIndex,
  OutOfRange,
  InvalidArgument,
  GridTooCoarse,
  AtSingularity,
  QuadratureUnderResolved,
  MassNotPositiveDefinite,
  ConvergenceFailure,
  NotConverged,
  ZeroVector,
  IndexMismatch,
  SymmetryMismatch,
  Io,
};

enum class ErrorCategory { ConfigParse, Validation, Numerical, Io };

ErrorCategory error_category(ErrorCode code);
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Index into a flattened (l, m) table: l*l + l + m.
inline constexpr int lm_index(int l, int m) { return l * l + l + m; }
inline constexpr int lm_count(int lmax) { return (lmax + 1) * (lmax + 1); }

}  // namespace apwdg
