#pragma once

#include <cstdint>
#include <string>

namespace kgrumor {
namespace pipeline {

// One resolved run: dataset paths, widths, training knobs, ablation flags.
// Defaults follow the reference configuration (d=64, d_e=50, M=100, k=3,
// alpha=0.9, hop_cap=5, 4 heads, lr=5e-4, batch=16).
struct RunConfig {
  std::string triples_path;
  std::string embeddings_path;
  std::string posts_path;

  int d = 64;
  int d_e = 50;
  int dictionary_size = 100;  // M
  int k = 3;
  double alpha = 0.9;
  int hop_cap = 5;
  int heads = 4;
  double lr = 5e-4;
  int batch = 16;
  int epochs = 30;
  std::uint64_t seed = 0;

  bool disable_bsc = false;
  bool disable_kec = false;
  bool disable_align = false;
  bool disable_se_i = false;  // drop semantic inconsistency
  bool disable_se_c = false;  // drop semantic consistency
  bool disable_e_i = false;   // drop entity inconsistency (negative attention)
  bool disable_e_c = false;   // drop entity consistency (positive attention)
  bool disable_path = false;  // direct embedding distance instead of paths

  void validate() const;  // throws on out-of-range values
};

// `key = value` per line; blank lines and '#' comments are ignored; unknown
// keys are rejected. Values already set on `into` are overwritten, so CLI
// flags applied after the file call win.
void apply_config_file(const std::string& path, RunConfig& into);

// Set one key programmatically (same key set as the file). Throws on unknown
// keys or unparsable values.
void apply_config_value(const std::string& key, const std::string& value, RunConfig& into);

std::string config_to_json(const RunConfig& cfg, double resolved_d_max, int d_raw);

}  // namespace pipeline
}  // namespace kgrumor
