#include "run_record.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "disrupt/error.hpp"
#include "version.hpp"

namespace disrupt::cli {

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunRecord::RunRecord(std::filesystem::path out_dir, bool force, std::string subcommand, std::uint64_t seed,
                     nlohmann::ordered_json config)
    : out_dir_(std::move(out_dir)), subcommand_(std::move(subcommand)), seed_(seed), config_(std::move(config)) {
  namespace fs = std::filesystem;
  if (out_dir_.empty()) throw DomainError("output directory is required");
  if (fs::exists(out_dir_)) {
    if (!fs::is_directory(out_dir_)) throw DomainError("output path is not a directory: " + out_dir_.string());
    if (!force && !fs::is_empty(out_dir_))
      throw DomainError("output directory is not empty (use --force): " + out_dir_.string());
  } else {
    fs::create_directories(out_dir_);
  }
  config_hash_ = content_hash(config_.dump());
}

void RunRecord::add_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("input not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  inputs_.push_back({{"path", path.generic_string()}, {"hash", content_hash(ss.str())}});
}

nlohmann::ordered_json RunRecord::header() const {
  nlohmann::ordered_json j;
  j["tool"] = "disrupt";
  j["version"] = kVersion;
  j["subcommand"] = subcommand_;
  j["seed"] = seed_;
  j["config_hash"] = config_hash_;
  return j;
}

void RunRecord::write_table(const std::string& name, const std::string& body) {
  std::string text = "# disrupt " + std::string(kVersion) + " " + subcommand_ + " seed=" + std::to_string(seed_) +
                     " config_hash=" + config_hash_ + "\n";
  text += body;
  write_file(name, text);
}

void RunRecord::write_json(const std::string& name, nlohmann::ordered_json body) {
  nlohmann::ordered_json j;
  j["run"] = header();
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  write_file(name, j.dump(2) + "\n");
}

void RunRecord::write_file(const std::string& name, const std::string& bytes) {
  const auto path = out_dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << bytes;
  out.close();
  if (!out) throw Error("write failed: " + path.string());
  artifacts_.push_back({{"name", name}, {"bytes", bytes.size()}, {"hash", content_hash(bytes)}});
}

void RunRecord::finish() {
  nlohmann::ordered_json j = header();
  j["config"] = config_;
  j["inputs"] = inputs_;
  j["artifacts"] = artifacts_;
  const std::string text = j.dump(2) + "\n";
  std::ofstream out(out_dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write manifest.json");
}

}  // namespace disrupt::cli
