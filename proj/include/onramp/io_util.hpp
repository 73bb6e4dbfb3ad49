#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

namespace onramp {

/**
 * Flat key-value run configuration: one `key = value` per line, `#` starts a
 * comment, blank lines are skipped.  Outer whitespace of keys and values is
 * trimmed, inner whitespace kept.  Later assignments win, so a file layers
 * under command-line overrides.
 */
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is);
  static KeyValueConfig parse_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  std::optional<std::string> find(const std::string& key) const;

  // Typed lookups fall back to the default when the key is absent and throw
  // std::invalid_argument (naming the key) when the value does not parse.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;  // true/false/1/0

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// FNV-1a over the sorted `key=value` lines; independent of assignment
  /// order, so a file plus overrides hashes like the equivalent flat file.
  std::uint64_t hash() const;

  void write(std::ostream& os) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// First line of every artifact:
/// `# onramp <version> config_hash=<16 hex digits> seed=<seed>`.
std::string artifact_header(const KeyValueConfig& config, std::uint64_t seed);

/// Open for reading/writing or throw std::runtime_error naming the path.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// create_directories wrapper that reports the offending path on failure.
void ensure_directory(const std::filesystem::path& path);

}  // namespace onramp
