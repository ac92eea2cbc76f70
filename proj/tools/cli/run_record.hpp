#pragma once

// Output directory bookkeeping: every artifact carries the run header, and
// manifest.json lists each artifact with its size and content hash.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace disrupt::cli {

/// FNV-1a 64-bit, as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

class RunRecord {
 public:
  /// Prepares out_dir: created when missing; must be empty unless force is set.
  RunRecord(std::filesystem::path out_dir, bool force, std::string subcommand, std::uint64_t seed,
            nlohmann::ordered_json config);

  const std::string& config_hash() const noexcept { return config_hash_; }
  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

  /// Records an input file by path and content hash.
  void add_input(const std::filesystem::path& path);

  /// Delimited text; the run header is prepended as '#' comment lines.
  void write_table(const std::string& name, const std::string& body);
  /// JSON object; the run header is inserted as the first key "run".
  void write_json(const std::string& name, nlohmann::ordered_json body);
  /// Writes manifest.json. Call once, after every artifact.
  void finish();

  nlohmann::ordered_json header() const;

 private:
  void write_file(const std::string& name, const std::string& bytes);

  std::filesystem::path out_dir_;
  std::string subcommand_;
  std::uint64_t seed_;
  nlohmann::ordered_json config_;
  std::string config_hash_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json artifacts_ = nlohmann::ordered_json::array();
};

}  // namespace disrupt::cli
