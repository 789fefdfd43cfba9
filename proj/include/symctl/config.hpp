#pragma once

// Flat key-value configs: `dotted.key = value` lines, `#` comments. One
// parsed map describes one simulation run; scenarios layer label/override
// sets on top of a base map.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "symctl/sim.hpp"

namespace symctl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ParsedConfig {
  std::map<std::string, std::string> kv;
  std::string source_name;

  void set(const std::string& key, const std::string& value) { kv[key] = value; }
  bool has(const std::string& key) const { return kv.count(key) != 0; }
};

ParsedConfig parse_config_text(std::string_view text, const std::string& source_name);
ParsedConfig load_config_file(const std::filesystem::path& path);

/// Sorted `key = value` lines; the hashing domain.
std::string canonical_config_text(const ParsedConfig& cfg);

/// FNV-1a over the canonical text, as a fixed-width hex string.
std::string config_hash_hex(const ParsedConfig& cfg);

/// Builds and fully validates a SimConfig (Hurwitz check, controllability,
/// composite construction, variant/parameter consistency). Unknown keys and
/// missing required keys raise ValidationError naming the key.
SimConfig build_sim_config(const ParsedConfig& cfg);

}  // namespace symctl
