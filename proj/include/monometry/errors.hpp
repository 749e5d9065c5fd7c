#pragma once

#include <stdexcept>
#include <string>

namespace monometry {

// Base of every error thrown by the library. Catching monometry::Error is
// enough for batch drivers that record-and-skip; the concrete type carries
// the failure class.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// generic argument / invariant violations
class InvalidArgument : public Error { public: using Error::Error; };
class InvalidBox : public Error { public: using Error::Error; };

// geometry
class DegenerateVectors : public Error { public: using Error::Error; };
class ParallelRay : public Error { public: using Error::Error; };
class BehindCamera : public Error { public: using Error::Error; };
class OutOfView : public Error { public: using Error::Error; };

// correction
class InsufficientSamples : public Error { public: using Error::Error; };
class RankDeficient : public Error { public: using Error::Error; };
class AxisMismatch : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };

// evaluation
class NoGroundTruth : public Error { public: using Error::Error; };
class EmptyGroundTruth : public Error { public: using Error::Error; };

// leakage
class WrongVisualLength : public Error { public: using Error::Error; };
class PerplexityTooLarge : public Error { public: using Error::Error; };
class DegenerateInput : public Error { public: using Error::Error; };
class TooFewClusters : public Error { public: using Error::Error; };
class ConstantVariables : public Error { public: using Error::Error; };

// batch pairing / dataset consistency
class UnpairedSamples : public Error { public: using Error::Error; };
class DisjointImageSets : public Error { public: using Error::Error; };

}  // namespace monometry
