#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gbfcd/fusion.hpp"
#include "gbfcd/metrics.hpp"
#include "gbfcd/sampling.hpp"
#include "gbfcd/selection.hpp"
#include "gbfcd/spectral.hpp"

namespace gbfcd {

struct RunConfig {
  std::string profile;
  std::filesystem::path pre_path;
  std::filesystem::path post_path;
  std::optional<std::filesystem::path> ref_path;
  std::filesystem::path out_dir = "gbfcd_out";
  Index n_s = 92;
  std::uint64_t seed = 1;
  /// 0 means "not set"; validate() rejects it.
  double sigma_pre = 0.0;
  double sigma_post = 0.0;
  int bins = 64;
  int ab_power = 3;
  DiffMode diff_mode = DiffMode::abs;
  MiOn mi_on = MiOn::raw;
  SamplerKind sampler = SamplerKind::uniform_random;
  FusionOp fusion = FusionOp::min;
  IndefiniteHandling indefinite = IndefiniteHandling::signature;
  bool normalize_inputs = false;
  std::optional<int> band;
  double changed_value = 255.0;
  bool compare_ki = false;
  bool dump_blocks = false;
  int dump_eigen_images = 0;

  /// Throws a config error when a field is out of range.
  void validate(bool require_paths) const;
};

/// Named presets of sampling/kernel parameters.
struct Profile {
  std::string name;
  std::string description;
  Index n_s;
  double sigma_pre;
  double sigma_post;
  int bins;
  int ab_power;
};

const std::vector<Profile>& profiles();
const Profile& find_profile(const std::string& name);
void apply_profile(RunConfig& cfg, const Profile& profile);

/// Sets one field by its RunConfig name (e.g. "n_s", "sigma_pre"). Unknown keys throw.
void set_config_field(RunConfig& cfg, const std::string& key, const std::string& value);
/// Applies a `key = value` file (# comments, optional quotes, blank lines ignored).
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
/// Every field as key -> string, the same keys set_config_field accepts.
std::map<std::string, std::string> config_fields(const RunConfig& cfg);
/// Reads the "config" object of a run_manifest.json.
RunConfig load_manifest_config(const std::filesystem::path& manifest);

struct Detection {
  SampleSet samples;
  EigenSystem<double> eigen;
  RasterImage diff;
  MICurve curve;
  RasterImage selected_image;
  ChangeMask change_map;
  Index clamped_pre = 0;
  Index clamped_post = 0;
  /// Populated only when cfg.dump_blocks is set.
  std::vector<AffinityBlocks<double>> graphs;
};

/// Sampling -> per-epoch graphs -> fusion -> orthogonal Nyström -> MI selection -> Otsu map.
Detection detect(const RasterImage& pre, const RasterImage& post, const RunConfig& cfg);

struct RunOutputs {
  std::filesystem::path manifest;
  std::optional<MetricsReport> metrics;
  std::optional<MetricsReport> ki_metrics;
  Index selected = 0;
};

/// Loads inputs, runs detect() and writes all artifacts into cfg.out_dir.
RunOutputs run_pipeline(const RunConfig& cfg);

struct SweepRow {
  double sigma;
  Index selected;
  double mi_nats;
  std::optional<double> kappa;
  std::optional<double> fa_pct;
};

/// Log-spaced sweep of a common sigma for both epochs; writes sigma_sweep.csv.
std::vector<SweepRow> sweep_sigma(const RunConfig& cfg, double lo, double hi, int steps);

struct OracleReport {
  Index n_total = 0;
  Index n_s = 0;
  Index retained = 0;
  double jitter = 0.0;
  Index negative_modes = 0;
  double max_eigenvalue_abs_diff = 0.0;
  double min_abs_inner_product = 1.0;
  double reconstruction_rel_frobenius = 0.0;
};

/// Nyström vs dense reference on a small pair (N <= 4096).
OracleReport compare_with_dense(const RasterImage& pre, const RasterImage& post, const RunConfig& cfg);

}  // namespace gbfcd
