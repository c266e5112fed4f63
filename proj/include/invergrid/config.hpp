#pragma once

#include "invergrid/scenario.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace invergrid {

/// Config problem tied to a source line (0 when the key was defaulted).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string key, const std::string& message);

    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

/// Parses the line-oriented scenario format:
///
///     # comment
///     [a2]
///     mode = volt_watt
///     timeline.dt = 0.005          # fully qualified keys work anywhere
///     [timeline]
///     event = t=13 slack_v=1.2     # list keys repeat
///
/// Omitted keys take the documented defaults; an empty text is the
/// reference scenario. Throws ConfigError naming the line and key.
ScenarioSpec parse_config(std::string_view text);

ScenarioSpec load_config_file(const std::filesystem::path& path);

/// Emits every field explicitly; parse_config(to_config_text(s)) == s.
std::string to_config_text(const ScenarioSpec& spec);

} // namespace invergrid
