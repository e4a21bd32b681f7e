#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hct/model/config.hpp"

namespace hct {

enum class ParamRole { weight, bias, gain };

struct ParamSpec {
  std::string name;
  std::vector<Index> dims;  // logical shape; storage is [prod(dims[:-1]), dims[-1]]
  Index fan_in = 0;
  ParamRole role = ParamRole::weight;

  Index rows() const;
  Index cols() const { return dims.back(); }
};

/// Names, logical shapes and roles of every learnable array, in a fixed order.
std::vector<ParamSpec> param_layout(const HctConfig& config);

/// Every learnable array of the network. The convolution branch is stored
/// once and applied to all 18 sensors.
template <class Scalar>
struct HctParams {
  HctConfig config;
  std::vector<std::string> names;
  std::vector<std::vector<Index>> dims;
  std::vector<Matrix<Scalar>> values;

  std::size_t size() const { return values.size(); }

  Index index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<Index>(i);
    }
    fail(ErrorKind::contract, "no parameter named '" + std::string(name) + "'");
  }

  const Matrix<Scalar>& operator[](std::string_view name) const { return values[static_cast<std::size_t>(index_of(name))]; }
  Matrix<Scalar>& operator[](std::string_view name) { return values[static_cast<std::size_t>(index_of(name))]; }

  Index scalar_count() const {
    Index n = 0;
    for (const auto& v : values) n += v.size();
    return n;
  }

  template <class To>
  HctParams<To> cast() const {
    HctParams<To> out{config, names, dims, {}};
    out.values.reserve(values.size());
    for (const auto& v : values) out.values.push_back(v.template cast<To>());
    return out;
  }
};

/// LeCun-uniform weights (limit sqrt(3 / fan_in)), zero biases, unit gains.
/// Deterministic for a given seed; the double variant is the float variant
/// widened.
template <class Scalar = float>
HctParams<Scalar> init_params(const HctConfig& config, std::uint64_t seed);

}  // namespace hct
