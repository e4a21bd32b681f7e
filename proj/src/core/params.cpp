#include "hct/model/params.hpp"

#include <cmath>
#include <random>

namespace hct {

Index ParamSpec::rows() const {
  Index r = 1;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) r *= dims[i];
  return r;
}

namespace {

void add_dense(std::vector<ParamSpec>& out, const std::string& prefix, Index in, Index out_width) {
  out.push_back({prefix + ".weight", {in, out_width}, in, ParamRole::weight});
  out.push_back({prefix + ".bias", {out_width}, in, ParamRole::bias});
}

void add_encoder(std::vector<ParamSpec>& out, const std::string& prefix, Index d, Index ff) {
  add_dense(out, prefix + ".query", d, d);
  out.push_back({prefix + ".key.weight", {d, d}, d, ParamRole::weight});
  add_dense(out, prefix + ".value", d, d);
  add_dense(out, prefix + ".output", d, d);
  out.push_back({prefix + ".norm1.gain", {d}, d, ParamRole::gain});
  out.push_back({prefix + ".norm1.bias", {d}, d, ParamRole::bias});
  add_dense(out, prefix + ".ff1", d, ff);
  add_dense(out, prefix + ".ff2", ff, d);
  out.push_back({prefix + ".norm2.gain", {d}, d, ParamRole::gain});
  out.push_back({prefix + ".norm2.bias", {d}, d, ParamRole::bias});
}

}  // namespace

std::vector<ParamSpec> param_layout(const HctConfig& config) {
  config.validate();
  std::vector<ParamSpec> out;
  Index in_channels = 1;
  for (std::size_t i = 0; i < config.conv_channels.size(); ++i) {
    const std::string prefix = "branch.conv" + std::to_string(i + 1);
    const Index cout = config.conv_channels[i];
    const Index fan_in = config.kernel_size * in_channels;
    out.push_back({prefix + ".kernel", {config.kernel_size, in_channels, cout}, fan_in, ParamRole::weight});
    out.push_back({prefix + ".bias", {cout}, fan_in, ParamRole::bias});
    in_channels = cout;
  }
  const Index dt = config.temporal_width;
  add_dense(out, "temporal.embed", 1, dt);
  add_encoder(out, "temporal.encoder", dt, config.ff_multiplier * dt);
  add_dense(out, "temporal.unembed", dt, 1);
  const Index reduce_width = config.shared_reduce ? config.reduced_length : config.sensors * config.reduced_length;
  add_dense(out, "reduce", config.branch_length, reduce_width);
  const Index ds = config.spatial_width;
  add_dense(out, "spatial.embed", config.reduced_length, ds);
  add_encoder(out, "spatial.encoder", ds, config.ff_multiplier * ds);
  Index width = config.sensors * ds;
  for (std::size_t i = 0; i < config.head_hidden.size(); ++i) {
    add_dense(out, "head.fc" + std::to_string(i + 1), width, config.head_hidden[i]);
    width = config.head_hidden[i];
  }
  add_dense(out, "head.output", width, config.output_units());
  return out;
}

template <class Scalar>
HctParams<Scalar> init_params(const HctConfig& config, std::uint64_t seed) {
  const auto layout = param_layout(config);
  Rng rng(seed);
  HctParams<float> p;
  p.config = config;
  for (const auto& spec : layout) {
    p.names.push_back(spec.name);
    p.dims.push_back(spec.dims);
    MatrixF m(spec.rows(), spec.cols());
    switch (spec.role) {
      case ParamRole::bias: m.setZero(); break;
      case ParamRole::gain: m.setOnes(); break;
      case ParamRole::weight: {
        const double limit = std::sqrt(3.0 / static_cast<double>(spec.fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(dist(rng));
        break;
      }
    }
    p.values.push_back(std::move(m));
  }
  if constexpr (std::is_same_v<Scalar, float>) {
    return p;
  } else {
    return p.template cast<Scalar>();
  }
}

template HctParams<float> init_params<float>(const HctConfig&, std::uint64_t);
template HctParams<double> init_params<double>(const HctConfig&, std::uint64_t);

}  // namespace hct
