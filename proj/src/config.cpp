#include "morphkit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "morphkit/error.hpp"

namespace morphkit {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorCode::config, "invalid value '" + value + "' for " + key + " (expected " +
                                     want + ")");
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  // from_chars for double is available in libstdc++ 11
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, v, "a finite number");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

struct Field {
  std::string key;
  std::function<void(MorphConfig&, const std::string&)> set;
  std::function<std::string(const MorphConfig&)> get;
};

template <typename T>
Field double_field(const char* key, T MorphConfig::*member) {
  return {key, [key, member](MorphConfig& c, const std::string& v) { c.*member = parse_double(key, v); },
          [member](const MorphConfig& c) { return format_double(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"frames", [](MorphConfig& c, const std::string& v) { c.frames = parse_int("frames", v); },
       [](const MorphConfig& c) { return std::to_string(c.frames); }},
      {"steps", [](MorphConfig& c, const std::string& v) { c.steps = parse_int("steps", v); },
       [](const MorphConfig& c) { return std::to_string(c.steps); }},
      double_field("lambda1", &MorphConfig::lambda1),
      double_field("lambda2", &MorphConfig::lambda2),
      double_field("lambda3", &MorphConfig::lambda3),
      double_field("lambda4", &MorphConfig::lambda4),
      double_field("cfg_scale", &MorphConfig::cfg_scale),
      double_field("inversion_cfg_scale", &MorphConfig::inversion_cfg_scale),
      double_field("noise_cutoff", &MorphConfig::noise_cutoff),
      {"transform",
       [](MorphConfig& c, const std::string& v) {
         if (v == "fft") c.transform = SpectralTransform::fft;
         else if (v == "dct") c.transform = SpectralTransform::dct;
         else bad_value("transform", v, "fft|dct");
       },
       [](const MorphConfig& c) { return std::string(to_string(c.transform)); }},
      {"noise_band",
       [](MorphConfig& c, const std::string& v) {
         if (v == "high") c.noise_band = NoiseBand::high;
         else if (v == "low") c.noise_band = NoiseBand::low;
         else bad_value("noise_band", v, "high|low");
       },
       [](const MorphConfig& c) { return std::string(to_string(c.noise_band)); }},
      {"seed", [](MorphConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
       [](const MorphConfig& c) { return std::to_string(c.seed); }},
      double_field("slerp_eps", &MorphConfig::slerp_eps),
      {"conditioning",
       [](MorphConfig& c, const std::string& v) {
         if (v == "blend") c.conditioning = FrameConditioning::blend;
         else if (v == "left") c.conditioning = FrameConditioning::left;
         else if (v == "right") c.conditioning = FrameConditioning::right;
         else bad_value("conditioning", v, "blend|left|right");
       },
       [](const MorphConfig& c) { return std::string(to_string(c.conditioning)); }},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw Error(ErrorCode::config, "unknown config key '" + key + "'");
}

}  // namespace

const char* to_string(SpectralTransform t) { return t == SpectralTransform::fft ? "fft" : "dct"; }
const char* to_string(NoiseBand b) { return b == NoiseBand::high ? "high" : "low"; }
const char* to_string(FrameConditioning c) {
  switch (c) {
    case FrameConditioning::blend: return "blend";
    case FrameConditioning::left: return "left";
    case FrameConditioning::right: return "right";
  }
  return "blend";
}

std::vector<std::string> config_violations(const MorphConfig& cfg) {
  std::vector<std::string> v;
  auto unit = [&](const char* name, double x) {
    if (!(x >= 0.0 && x <= 1.0)) v.push_back(std::string(name) + " must lie in [0, 1], got " + format_double(x));
  };
  if (cfg.frames < 1) v.push_back("frames must be >= 1, got " + std::to_string(cfg.frames));
  if (cfg.steps < 2) v.push_back("steps must be >= 2, got " + std::to_string(cfg.steps));
  unit("lambda1", cfg.lambda1);
  unit("lambda2", cfg.lambda2);
  unit("lambda3", cfg.lambda3);
  unit("lambda4", cfg.lambda4);
  if (cfg.lambda1 > cfg.lambda2) v.push_back("lambda1 must not exceed lambda2");
  if (cfg.lambda3 > cfg.lambda4) v.push_back("lambda3 must not exceed lambda4");
  if (!(cfg.noise_cutoff > 0.0 && cfg.noise_cutoff <= 1.0))
    v.push_back("noise_cutoff must lie in (0, 1], got " + format_double(cfg.noise_cutoff));
  if (!(cfg.slerp_eps > 0.0)) v.push_back("slerp_eps must be positive");
  if (!std::isfinite(cfg.cfg_scale)) v.push_back("cfg_scale must be finite");
  if (!std::isfinite(cfg.inversion_cfg_scale)) v.push_back("inversion_cfg_scale must be finite");
  return v;
}

const MorphConfig& validate_config(const MorphConfig& cfg) {
  auto violations = config_violations(cfg);
  if (!violations.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& s : violations) msg += "\n  - " + s;
    throw Error(ErrorCode::config, msg);
  }
  return cfg;
}

void set_config_value(MorphConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, trim(value));
}

std::string get_config_value(const MorphConfig& cfg, const std::string& key) {
  return field(key).get(cfg);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

MorphConfig parse_config(const std::string& text, MorphConfig base) {
  std::istringstream in(text);
  std::string line;
  bool manifest = false;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(line);
    if (first && !body.empty()) {
      first = false;
      if (body == "schema=1") {
        manifest = true;
        continue;
      }
    }
    if (body.empty() || body.front() == '#') continue;
    auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (manifest) {
      if (key.rfind("config.", 0) != 0) continue;
      key = key.substr(7);
    } else {
      auto hash = value.find(" #");
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    set_config_value(base, key, unquote(value));
  }
  return base;
}

MorphConfig load_config_file(const std::string& path, MorphConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

std::string format_config(const MorphConfig& cfg, const std::string& prefix) {
  std::string out;
  for (const auto& f : fields()) out += prefix + f.key + "=" + f.get(cfg) + "\n";
  return out;
}

}  // namespace morphkit
