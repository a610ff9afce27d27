#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldgoe {

// Extended real value: a finite double or +infinity as an explicit variant.
// Keeps test assertions able to tell a genuine +inf from overflow.
class ExtReal {
public:
  ExtReal() : v_(0.0), inf_(false) {}
  static ExtReal finite(double v) { return ExtReal(v, false); }
  static ExtReal infinity() { return ExtReal(0.0, true); }

  bool is_infinite() const { return inf_; }
  double value() const {
    if (inf_) throw std::logic_error("ExtReal: value() on +infinity");
    return v_;
  }
  // Collapses to a plain double (+inf for the infinite variant).
  double as_double() const {
    return inf_ ? std::numeric_limits<double>::infinity() : v_;
  }

  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
  }

private:
  ExtReal(double v, bool inf) : v_(v), inf_(inf) {}
  double v_;
  bool inf_;
};

}  // namespace ldgoe
