#include "pdswitch/config.hpp"

#include <fstream>
#include <sstream>

namespace pdswitch {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[static_cast<std::size_t>(k)] = kDigits[v & 0xf];
  return s;
}

namespace {

ModeValues mode_values_from(const json& j) {
  if (j.is_number()) return ModeValues(j.get<double>());
  return ModeValues(j.get<std::vector<double>>());
}

RegisteredModel build(const std::string& name, const json& params) {
  try {
    return registry_get(name, params);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

}  // namespace

ModelConfig parse_model_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("name") || !doc.at("name").is_string()) {
    throw ConfigError("model config needs a string field 'name'");
  }

  const std::string name = doc.at("name").get<std::string>();
  const json params = doc.value("params", json::object());
  ModelConfig cfg{.name = name, .params = params, .built = build(name, params)};
  cfg.hash = hex64(fnv1a64(text));
  try {
    const ModelSpec& m = cfg.built.model;

    if (doc.contains("dim") && doc.at("dim").get<int>() != m.dim) {
      throw ConfigError("model config: dim does not match model '" + cfg.name + "'");
    }
    if (doc.contains("brownian_dim") && doc.at("brownian_dim").get<int>() != m.brownian_dim) {
      throw ConfigError("model config: brownian_dim does not match model '" + cfg.name + "'");
    }
    if (doc.contains("rate_bound")) {
      const double M = doc.at("rate_bound").get<double>();
      if (!(M >= m.rate_bound)) {
        throw ConfigError("model config: rate_bound is below the model's own bound");
      }
      cfg.built.model.rate_bound = M;
    }
    cfg.truncation_hint = doc.value("truncation_hint", Mode{30});
    if (cfg.truncation_hint < 2) throw ConfigError("model config: truncation_hint must be >= 2");

    cfg.x0 = Vector::Zero(m.dim);
    if (doc.contains("initial")) {
      const json& init = doc.at("initial");
      if (init.contains("x0")) {
        const auto x = init.at("x0").get<std::vector<double>>();
        if (static_cast<int>(x.size()) != m.dim) throw ConfigError("model config: initial.x0 has wrong length");
        cfg.x0 = Eigen::Map<const Vector>(x.data(), m.dim);
      }
      cfg.i0 = init.value("mode", Mode{1});
      if (cfg.i0 < 1) throw ConfigError("model config: initial.mode must be >= 1");
    }

    if (doc.contains("assumptions")) {
      const json& a = doc.at("assumptions");
      if (a.contains("elliptic")) cfg.elliptic = a.at("elliptic").get<bool>();
      if (a.contains("drift_condition")) {
        const json& d = a.at("drift_condition");
        DriftConditionSpec spec;
        spec.k0 = d.value("k0", Mode{1});
        if (d.contains("eta")) spec.eta = mode_values_from(d.at("eta"));
        if (spec.k0 < 1 || spec.eta.min() < 0.0) {
          throw ConfigError("model config: drift_condition needs k0 >= 1 and eta >= 0");
        }
        cfg.drift_condition = spec;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

}  // namespace pdswitch
