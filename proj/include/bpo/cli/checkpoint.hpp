#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpo/cli/config_file.hpp"
#include "bpo/train/agent.hpp"
#include "bpo/trpo/baseline.hpp"

namespace bpo::cli {

// Checkpoint file (JSON):
//   format   "bpo-checkpoint"
//   version  1
//   config   {section.key: value} for every schema key
//   meta     free-form run information (seed, best iteration, ...)
//   arrays   [{name, shape, data}], weights column-major with shape [out, in]
// Doubles are written in shortest round-trip form, so loading reproduces the
// parameters bit for bit.

inline constexpr int kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<Index> shape;
  Index offset = 0;  // into the owning flat vector
  Index size() const {
    Index n = 1;
    for (Index d : shape) n *= d;
    return n;
  }
};

/// Named slices of a network's flat parameter vector, in layout order.
inline std::vector<NamedArray> network_layout(const net::DualEncoderNet& net, const std::string& prefix) {
  std::vector<NamedArray> out;
  const auto add_mlp = [&](const net::Mlp& mlp, const std::string& name) {
    for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
      const net::DenseLayer& layer = mlp.layers()[l];
      const std::string base = prefix + "." + name + "." + std::to_string(l);
      out.push_back({base + ".weight", {layer.out, layer.in}, layer.offset});
      out.push_back({base + ".bias", {layer.out}, layer.offset + layer.out * layer.in});
    }
  };
  if (net.state_encoder()) add_mlp(*net.state_encoder(), "state_encoder");
  if (net.belief_encoder()) add_mlp(*net.belief_encoder(), "belief_encoder");
  add_mlp(net.head(), "head");
  return out;
}

inline std::vector<NamedArray> policy_layout(const net::Policy& policy) {
  std::vector<NamedArray> out = network_layout(policy.network(), "policy");
  if (!policy.discrete()) out.push_back({"policy.log_std", {policy.action_dim()}, policy.log_std_offset()});
  return out;
}

struct Checkpoint {
  TrainConfig config;
  Vector policy;
  Vector value;
  double value_shift = 0.0;
  double value_scale = 1.0;
  nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

inline nlohmann::json array_json(const NamedArray& a, const Vector& flat) {
  std::vector<double> data(flat.data() + a.offset, flat.data() + a.offset + a.size());
  return {{"name", a.name}, {"shape", a.shape}, {"data", data}};
}

inline void read_arrays(const nlohmann::json& arrays, const std::vector<NamedArray>& layout, Vector& flat) {
  for (const NamedArray& a : layout) {
    const nlohmann::json* found = nullptr;
    for (const auto& j : arrays)
      if (j.at("name").get<std::string>() == a.name) found = &j;
    if (!found) throw std::runtime_error("checkpoint is missing array '" + a.name + "'");
    if (found->at("shape").get<std::vector<Index>>() != a.shape)
      throw std::runtime_error("checkpoint array '" + a.name + "' has the wrong shape");
    const auto data = found->at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != a.size())
      throw std::runtime_error("checkpoint array '" + a.name + "' has the wrong size");
    std::copy(data.begin(), data.end(), flat.data() + a.offset);
  }
}

}  // namespace detail

inline nlohmann::json config_json(const TrainConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  KeyValues entries;
  for (const auto& [k, v] : j.items()) entries.emplace_back(k, v.get<std::string>());
  return build_config(entries);
}

inline nlohmann::json checkpoint_json(const Checkpoint& ck) {
  const Agent agent(ck.config);
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& a : policy_layout(agent.policy())) arrays.push_back(detail::array_json(a, ck.policy));
  const net::DualEncoderNet value_net(agent.value_config());
  for (const auto& a : network_layout(value_net, "value")) arrays.push_back(detail::array_json(a, ck.value));
  arrays.push_back({{"name", "value.output_stats"}, {"shape", {2}}, {"data", {ck.value_shift, ck.value_scale}}});
  return {{"format", "bpo-checkpoint"},
          {"version", kCheckpointVersion},
          {"config", config_json(ck.config)},
          {"meta", ck.meta},
          {"arrays", arrays}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "bpo-checkpoint") throw std::runtime_error("not a checkpoint file");
  if (j.value("version", 0) != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  Checkpoint ck;
  ck.config = config_from_json(j.at("config"));
  ck.meta = j.value("meta", nlohmann::json::object());
  const Agent agent(ck.config);
  const auto& arrays = j.at("arrays");
  ck.policy = Vector::Zero(agent.policy().num_params());
  detail::read_arrays(arrays, policy_layout(agent.policy()), ck.policy);
  const net::DualEncoderNet value_net(agent.value_config());
  ck.value = Vector::Zero(value_net.num_params());
  detail::read_arrays(arrays, network_layout(value_net, "value"), ck.value);
  Vector stats(2);
  detail::read_arrays(arrays, {{"value.output_stats", {2}, 0}}, stats);
  ck.value_shift = stats[0];
  ck.value_scale = stats[1];
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  os << checkpoint_json(ck).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace bpo::cli
