#pragma once

#include "funnystrom/types.hpp"

#include <type_traits>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

namespace funnystrom {

/// A scalar map f: [0,inf) -> [0,inf) with f(0) = 0, applied elementwise to
/// eigenvalue vectors. Operator monotonicity is a declared property of the
/// registered function, not something verified at runtime; the registry
/// includes square and expm1, which are increasing but NOT operator monotone,
/// so that tests can exhibit bound failures when the flag is false.
template <typename Scalar>
struct ScalarFunction {
  std::string name;
  std::function<Scalar(Scalar)> eval;
  bool is_monotone = false;
  bool is_operator_monotone = false;
  Scalar right_derivative_at_zero = Scalar(0);  // +inf for sqrt
  Scalar mu = Scalar(0);                        // parameter of the ratio function

  Scalar operator()(Scalar x) const { return eval(x); }
};

template <typename Scalar = double>
ScalarFunction<Scalar> make_identity() {
  return {"identity", [](Scalar x) { return x; }, true, true, Scalar(1), Scalar(0)};
}

template <typename Scalar = double>
ScalarFunction<Scalar> make_sqrt() {
  return {"sqrt", [](Scalar x) { return std::sqrt(x); }, true, true,
          std::numeric_limits<Scalar>::infinity(), Scalar(0)};
}

template <typename Scalar = double>
ScalarFunction<Scalar> make_log1p() {
  return {"log1p", [](Scalar x) { return std::log1p(x); }, true, true, Scalar(1), Scalar(0)};
}

/// f(x) = x / (x + mu), mu > 0. Summing it over a spectrum gives the
/// effective dimension.
template <typename Scalar = double>
ScalarFunction<Scalar> make_ratio(Scalar mu) {
  if (!(mu > Scalar(0))) {
    throw std::invalid_argument("ratio function needs mu > 0");
  }
  return {"ratio", [mu](Scalar x) { return x / (x + mu); }, true, true, Scalar(1) / mu, mu};
}

template <typename Scalar = double>
ScalarFunction<Scalar> make_square() {
  return {"square", [](Scalar x) { return x * x; }, true, false, Scalar(0), Scalar(0)};
}

template <typename Scalar = double>
ScalarFunction<Scalar> make_expm1() {
  return {"expm1", [](Scalar x) { return std::expm1(x); }, true, false, Scalar(1), Scalar(0)};
}

/// Parses a function spec string: `sqrt`, `log1p`, `identity`, `square`,
/// `expm1`, or `ratio:mu=<value>`.
template <typename Scalar = double>
ScalarFunction<Scalar> parse_function(const std::string& spec) {
  if (spec == "identity") return make_identity<Scalar>();
  if (spec == "sqrt") return make_sqrt<Scalar>();
  if (spec == "log1p") return make_log1p<Scalar>();
  if (spec == "square") return make_square<Scalar>();
  if (spec == "expm1") return make_expm1<Scalar>();
  if (spec.rfind("ratio:mu=", 0) == 0) {
    std::istringstream in(spec.substr(9));
    Scalar mu;
    if (!(in >> mu) || !in.eof()) {
      throw std::invalid_argument("cannot parse ratio parameter in '" + spec + "'");
    }
    return make_ratio<Scalar>(mu);
  }
  throw std::invalid_argument("unknown function spec '" + spec + "'");
}

/// Applies f elementwise to an eigenvalue vector. Small negative entries
/// (within 1e-12 * max of being zero) are clamped to 0 before evaluation;
/// anything more negative is rejected as a violation of the SPSD assumption.
template <typename Scalar>
Vector<Scalar> apply_to_spectrum(const ScalarFunction<Scalar>& f,
                                 const std::type_identity_t<Eigen::Ref<const Vector<Scalar>>>& lambda) {
  const Scalar scale = lambda.size() > 0 ? std::max(lambda.maxCoeff(), Scalar(0)) : Scalar(0);
  const Scalar noise_floor = Scalar(-1e-12) * scale;
  Vector<Scalar> result(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < noise_floor) {
      throw NumericalError("apply_to_spectrum: eigenvalue " + std::to_string(lambda[i]) +
                           " violates the SPSD assumption");
    }
    result[i] = f.eval(std::max(lambda[i], Scalar(0)));
  }
  return result;
}

}  // namespace funnystrom
