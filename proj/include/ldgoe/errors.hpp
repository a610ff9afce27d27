#pragma once

#include <stdexcept>
#include <string>

namespace ldgoe {

// Base for all domain errors thrown by the library. The CLI maps these to
// exit code 3; configuration problems (bad flags, unreadable files) to 2.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation point coincides with an atom of the measure.
class AtomCollision : public Error {
public:
  using Error::Error;
};

// Quantile function is not bounded (or not finite at a breakpoint).
class UnboundedQuantile : public Error {
public:
  using Error::Error;
};

// Argument of H on or above the left edge of the measure's support.
class DomainAboveSupport : public Error {
public:
  using Error::Error;
};

// Argument above the left edge of the free convolution.
class AboveEdge : public Error {
public:
  using Error::Error;
};

// Decreasing branch of H does not attain the requested value.
class BelowBranch : public Error {
public:
  using Error::Error;
};

// Outlier located exactly at the support edge where H diverges.
class OutlierAtEdge : public Error {
public:
  using Error::Error;
};

// Derivative requested at the branch-switch point of the rate function.
class AtBranchPoint : public Error {
public:
  using Error::Error;
};

// Tilt parameter outside the admissible range of the variational formula.
class ThetaOutOfRange : public Error {
public:
  using Error::Error;
};

// Direction lies (numerically) inside an eigenspace of the diagonal part.
class DegenerateDirection : public Error {
public:
  using Error::Error;
};

}  // namespace ldgoe
