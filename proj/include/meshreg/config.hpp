#pragma once

#include <string>

#include "meshreg/optimizer.hpp"

namespace meshreg {

/// Reads a RegistrationConfig from a TOML (flat keys plus a [patch] section)
/// or JSON file; the format is picked by extension, with a content sniff as
/// fallback. Unknown keys are rejected. Missing keys keep their defaults.
RegistrationConfig load_registration_config(const std::string& path);

/// Parses the text form directly (used by the loader and the tests).
RegistrationConfig parse_registration_config(const std::string& text, bool is_toml);

std::string config_json(const RegistrationConfig& config);

}  // namespace meshreg
