#pragma once

#include <cmath>
#include <cstdint>

namespace iaei {

// Kahan compensated accumulator. Row sums in the objective evaluators use a
// fixed accumulation order (environments in dataset order, rows in storage
// order) so the complete-data reduction identities hold at 1e-12.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline bool nearly_equal(double a, double b, double tol) {
    if (a == b) return true;
    const double scale = std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
    return std::fabs(a - b) <= tol * scale;
}

}  // namespace iaei
