#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "gbfcd/error.hpp"
#include "gbfcd/metrics.hpp"
#include "gbfcd/pipeline.hpp"
#include "gbfcd/raster_io.hpp"
#include "gbfcd/synthetic.hpp"

namespace {

using gbfcd::RunConfig;

// Options that map one-to-one onto RunConfig keys. Only flags the user passed are applied,
// after manifest, profile and config file.
struct FieldFlags {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(key, app.add_option(flag, values[key], help));
  }
  void add_switch(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    auto* opt = app.add_flag(flag, help);
    options.emplace_back(key, opt);
    values[key] = "true";
  }
  void apply(RunConfig& cfg) const {
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) gbfcd::set_config_field(cfg, key, values.at(key));
  }
};

void add_pipeline_flags(CLI::App& app, FieldFlags& f) {
  f.add(app, "--n-s", "n_s", "number of Nyström samples");
  f.add(app, "--seed", "seed", "run seed");
  f.add(app, "--sigma-pre", "sigma_pre", "kernel width, first epoch");
  f.add(app, "--sigma-post", "sigma_post", "kernel width, second epoch");
  f.add(app, "--bins", "bins", "MI histogram bins per axis");
  f.add(app, "--ab-power", "ab_power", "exponent on sample/complement distances {1,3}");
  f.add(app, "--diff", "diff_mode", "difference image {abs,signed}");
  f.add(app, "--mi-on", "mi_on", "MI on eigen-image {raw,thresholded}");
  f.add(app, "--sampler", "sampler", "sampler {uniform-random,grid}");
  f.add(app, "--fusion", "fusion", "fusion operator {min}");
  f.add(app, "--indefinite", "indefinite", "non-PD sample block handling {signature,jitter}");
  f.add_switch(app, "--normalize", "normalize_inputs", "min-max rescale inputs to [0,1]");
  f.add(app, "--band", "band", "band index for multi-band rasters");
}

std::pair<double, double> parse_sweep(const std::string& text, int& steps) {
  const auto a = text.find(':');
  const auto b = text.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw gbfcd::config_error("cli", "--sweep-sigma expects lo:hi:steps");
  try {
    steps = std::stoi(text.substr(b + 1));
    return {std::stod(text.substr(0, a)), std::stod(text.substr(a + 1, b - a - 1))};
  } catch (const std::exception&) {
    throw gbfcd::config_error("cli", "--sweep-sigma expects lo:hi:steps, got '" + text + "'");
  }
}

std::string opt_text(const std::optional<double>& v) {
  if (!v) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based fusion change detection for bi-temporal rasters"};
  app.set_version_flag("--version", GBFCD_VERSION);
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "detect changes between two co-registered rasters");
  FieldFlags run_flags;
  std::string profile, config_file, manifest, sweep;
  run->add_option("--profile", profile, "named parameter preset (mulargia, omodeo, synthetic)");
  run->add_option("--config", config_file, "key = value file using RunConfig field names");
  run->add_option("--manifest", manifest, "re-run from a run_manifest.json");
  run->add_option("--sweep-sigma", sweep, "log-spaced sigma sweep lo:hi:steps (same sigma for both epochs)");
  run_flags.add(*run, "--pre", "pre_path", "first-epoch raster");
  run_flags.add(*run, "--post", "post_path", "second-epoch raster");
  run_flags.add(*run, "--ref", "ref_path", "reference change mask");
  run_flags.add(*run, "--out-dir", "out_dir", "output directory");
  run_flags.add(*run, "--changed-value", "changed_value", "mask value meaning changed");
  run_flags.add(*run, "--compare", "compare", "baseline to score alongside {ki}");
  run_flags.add_switch(*run, "--dump-blocks", "dump_blocks", "write affinity blocks as GBFR");
  run_flags.add(*run, "--dump-eigen-images", "dump_eigen_images", "write the first K eigen-images");
  add_pipeline_flags(*run, run_flags);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic pre/post/ref triplet");
  gbfcd::SyntheticSpec spec;
  std::string shape = "rect", synth_out = ".";
  synth->add_option("--width", spec.width);
  synth->add_option("--height", spec.height);
  synth->add_option("--shape", shape, "rect or disk");
  synth->add_option("--shape-width", spec.shape_width);
  synth->add_option("--shape-height", spec.shape_height);
  synth->add_option("--shift", spec.shift);
  synth->add_option("--noise-sd", spec.noise_sd);
  synth->add_option("--seed", spec.seed);
  synth->add_option("--out-dir", synth_out);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "compare Nyström against the dense reference on a small pair");
  FieldFlags oracle_flags;
  std::string oracle_pre, oracle_post;
  gbfcd::Index synth_size = 0;
  std::uint64_t synth_seed = 1;
  oracle->add_option("--pre", oracle_pre);
  oracle->add_option("--post", oracle_post);
  oracle->add_option("--synthetic", synth_size, "use a generated SxS pair instead of files");
  oracle->add_option("--synthetic-seed", synth_seed);
  add_pipeline_flags(*oracle, oracle_flags);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "score a predicted mask against a reference");
  std::string pred_path, ref_path, method = "prediction";
  double changed_value = 255.0;
  metrics->add_option("--pred", pred_path)->required();
  metrics->add_option("--ref", ref_path)->required();
  metrics->add_option("--changed-value", changed_value);
  metrics->add_option("--method", method, "label for the CSV row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(gbfcd::ErrorKind::config);
  }

  try {
    if (*run) {
      RunConfig cfg = manifest.empty() ? RunConfig{} : gbfcd::load_manifest_config(manifest);
      if (!profile.empty()) gbfcd::set_config_field(cfg, "profile", profile);
      if (!config_file.empty()) gbfcd::apply_config_file(cfg, config_file);
      run_flags.apply(cfg);
      if (!sweep.empty()) {
        int steps = 0;
        const auto [lo, hi] = parse_sweep(sweep, steps);
        for (const auto& row : gbfcd::sweep_sigma(cfg, lo, hi, steps))
          std::printf("%.6g selected=%lld mi=%.6f kappa=%s fa=%s\n", row.sigma, static_cast<long long>(row.selected), row.mi_nats,
                      opt_text(row.kappa).c_str(), opt_text(row.fa_pct).c_str());
        return 0;
      }
      const auto out = gbfcd::run_pipeline(cfg);
      if (out.metrics) std::cout << gbfcd::metrics_csv_header() << "\n" << gbfcd::metrics_csv_row("gbf-cd", *out.metrics) << "\n";
      if (out.ki_metrics) std::cout << gbfcd::metrics_csv_row("ki", *out.ki_metrics) << "\n";
      std::cout << "manifest: " << out.manifest.string() << "\n";
    } else if (*synth) {
      spec.shape = gbfcd::parse_shape(shape);
      const auto scene = gbfcd::generate_synthetic(spec);
      std::error_code ec;
      std::filesystem::create_directories(synth_out, ec);
      if (ec) throw gbfcd::io_error("raster-io", "cannot create '" + synth_out + "'");
      const std::filesystem::path dir = synth_out;
      gbfcd::write_raw(dir / "pre.gbfr", scene.pre);
      gbfcd::write_raw(dir / "post.gbfr", scene.post);
      gbfcd::write_mask_png(dir / "ref.png", scene.ref);
      std::cout << "wrote " << (dir / "pre.gbfr").string() << ", post.gbfr, ref.png (" << scene.ref.count_changed() << " changed)\n";
    } else if (*oracle) {
      RunConfig cfg;
      oracle_flags.apply(cfg);
      gbfcd::RasterImage pre, post;
      if (synth_size > 0) {
        gbfcd::SyntheticSpec s;
        s.width = s.height = synth_size;
        s.shape_width = s.shape_height = std::max<gbfcd::Index>(1, synth_size / 4);
        s.seed = synth_seed;
        auto scene = gbfcd::generate_synthetic(s);
        pre = std::move(scene.pre);
        post = std::move(scene.post);
      } else {
        if (oracle_pre.empty() || oracle_post.empty()) throw gbfcd::config_error("cli", "oracle needs --pre/--post or --synthetic");
        const gbfcd::LoadOptions load{cfg.band, cfg.normalize_inputs};
        pre = gbfcd::load_raster(oracle_pre, load);
        post = gbfcd::load_raster(oracle_post, load);
      }
      if (pre.size() > gbfcd::kDenseReferenceMaxPixels)
        throw gbfcd::config_error("cli", "oracle is limited to " + std::to_string(gbfcd::kDenseReferenceMaxPixels) + " pixels");
      const auto r = gbfcd::compare_with_dense(pre, post, cfg);
      nlohmann::json doc = {{"n_total", r.n_total},
                            {"n_s", r.n_s},
                            {"retained", r.retained},
                            {"jitter", r.jitter},
                            {"negative_modes", r.negative_modes},
                            {"max_eigenvalue_abs_diff", r.max_eigenvalue_abs_diff},
                            {"min_abs_inner_product", r.min_abs_inner_product},
                            {"reconstruction_rel_frobenius", r.reconstruction_rel_frobenius}};
      std::cout << doc.dump(2) << "\n";
    } else if (*metrics) {
      const auto pred = gbfcd::load_mask(pred_path, changed_value);
      const auto ref = gbfcd::load_mask(ref_path, changed_value);
      const auto r = gbfcd::report(gbfcd::confusion(pred, ref));
      std::cout << gbfcd::metrics_csv_header() << "\n" << gbfcd::metrics_csv_row(method, r) << "\n";
    }
  } catch (const gbfcd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
