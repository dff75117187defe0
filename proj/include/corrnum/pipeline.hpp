#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <string_view>

#include "corrnum/config.hpp"
#include "corrnum/spectrum.hpp"

namespace corrnum {

std::string sha256_hex(std::string_view bytes);

// Output directory plus manifest.json mapping each file to its SHA-256.
// Entries written by earlier commands into the same directory are kept.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::string& bytes);
  void write_json(const std::string& name, const nlohmann::json& doc) { write(name, doc.dump(2) + "\n"); }
  // Records a file already on disk.
  void record(const std::string& name);
  void save() const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> files_;
};

// Each command writes into config.out and returns the process exit code;
// library errors propagate as corrnum::Error.
int cmd_enumerate(const RunConfig& config, std::ostream& log);
int cmd_spectrum(const RunConfig& config, std::ostream& log);
int cmd_entropy(const RunConfig& config, std::ostream& log);
int cmd_manhattan(const RunConfig& config, std::ostream& log);
int cmd_correlate(const RunConfig& config, std::ostream& log);
int cmd_demo(const RunConfig& config, std::ostream& log);

// Loads spectrum.csv from the output directory when its parameter hash
// matches, otherwise computes and saves it.
SpectrumTable obtain_spectrum(const RunConfig& config, Manifest& manifest, std::ostream& log);
std::string spectrum_parameter_hash(const RunConfig& config);

// Power, inverse and recomputation identities on seed-chosen rows.
nlohmann::json spot_check(const SpectrumTable& table, const std::vector<SpectrumRequest>& requests, int samples,
                          std::uint64_t seed);

}  // namespace corrnum
