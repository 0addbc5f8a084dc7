#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace morphkit {

enum class SpectralTransform { fft, dct };
// Which spectral band receives Gaussian noise after forward diffusion.
enum class NoiseBand { high, low };
// How intermediate frames are conditioned textually.
enum class FrameConditioning { blend, left, right };

struct MorphConfig {
  int frames = 5;  // J intermediate frames
  int steps = 50;  // T DDIM steps
  double lambda1 = 0.3;
  double lambda2 = 0.6;
  double lambda3 = 0.2;
  double lambda4 = 0.6;
  double cfg_scale = 7.5;
  double inversion_cfg_scale = 1.0;
  double noise_cutoff = 0.5;  // fraction of the spectral radius treated as the noise band
  SpectralTransform transform = SpectralTransform::fft;
  NoiseBand noise_band = NoiseBand::high;
  std::uint64_t seed = 0;
  double slerp_eps = 1e-6;
  FrameConditioning conditioning = FrameConditioning::blend;

  friend bool operator==(const MorphConfig&, const MorphConfig&) = default;
};

// All invariant violations, empty when the config is valid.
std::vector<std::string> config_violations(const MorphConfig& cfg);

// Returns cfg unchanged or throws ErrorCode::config listing every violation.
const MorphConfig& validate_config(const MorphConfig& cfg);

// Key/value surface shared by config files, CLI overrides and run manifests.
// Unknown keys and malformed values throw ErrorCode::config.
void set_config_value(MorphConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const MorphConfig& cfg, const std::string& key);
const std::vector<std::string>& config_keys();

// Flat `key = value` text; '#' starts a comment, blank lines are ignored,
// values may be double-quoted. A run manifest (first line `schema=1`) is
// also accepted, in which case only its `config.` keys are read.
MorphConfig parse_config(const std::string& text, MorphConfig base = {});
MorphConfig load_config_file(const std::string& path, MorphConfig base = {});

// `key=value` lines in config_keys() order.
std::string format_config(const MorphConfig& cfg, const std::string& prefix = "");

const char* to_string(SpectralTransform t);
const char* to_string(NoiseBand b);
const char* to_string(FrameConditioning c);

}  // namespace morphkit
