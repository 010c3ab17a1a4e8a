#pragma once

// Double-double accumulator. Sums of the same terms agree to ~2^-106
// relative whatever the order, so the rounded value does not depend on the
// order in which messages arrive. Push-sum ratios w/y are badly conditioned
// once y gets small, which turns plain summation-order noise into visible
// differences between otherwise identical executions.

namespace asynag {

class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double v) : hi_(v) {}

  void add(double t) {
    double e;
    const double s = two_sum(hi_, t, e);
    normalize(s, e + lo_);
  }

  void add(const CompensatedSum& o) {
    double e;
    const double s = two_sum(hi_, o.hi_, e);
    normalize(s, e + (lo_ + o.lo_));
  }

  double value() const { return hi_ + lo_; }
  void reset() { hi_ = lo_ = 0.0; }

 private:
  static double two_sum(double a, double b, double& err) {
    const double s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
  }

  void normalize(double s, double e) {
    hi_ = s + e;
    lo_ = e - (hi_ - s);
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace asynag
