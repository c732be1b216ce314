#include <gtest/gtest.h>

#include <json.hpp>

#include "gbfcd/pipeline.hpp"
#include "gbfcd/raster_io.hpp"
#include "gbfcd/synthetic.hpp"
#include "test_support.hpp"

using namespace gbfcd;
using gbfcd::test::TempDir;

namespace {

RunConfig synthetic_run(const TempDir& dir, std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.seed = seed;
  const auto scene = generate_synthetic(spec);
  write_raw(dir / "pre.gbfr", scene.pre);
  write_raw(dir / "post.gbfr", scene.post);
  write_mask_png(dir / "ref.png", scene.ref);
  RunConfig cfg;
  apply_profile(cfg, find_profile("synthetic"));
  cfg.seed = seed;
  cfg.pre_path = dir / "pre.gbfr";
  cfg.post_path = dir / "post.gbfr";
  cfg.ref_path = dir / "ref.png";
  cfg.out_dir = dir / "out";
  return cfg;
}

int code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.exit_code();
  }
  return 0;
}

}  // namespace

TEST(Config, Validation) {
  RunConfig cfg;
  EXPECT_EQ(code_of([&] { cfg.validate(false); }), 2);
  cfg.sigma_pre = cfg.sigma_post = 1e-3;
  EXPECT_NO_THROW(cfg.validate(false));
  cfg.n_s = 0;
  EXPECT_EQ(code_of([&] { cfg.validate(false); }), 2);
  cfg.n_s = 5;
  cfg.ab_power = 2;
  EXPECT_EQ(code_of([&] { cfg.validate(false); }), 2);
  cfg.ab_power = 1;
  EXPECT_EQ(code_of([&] { cfg.validate(true); }), 2);
  cfg.pre_path = "a.png";
  cfg.post_path = "b.png";
  cfg.out_dir = "a.png";
  EXPECT_EQ(code_of([&] { cfg.validate(true); }), 2);
  cfg.out_dir = "out";
  EXPECT_NO_THROW(cfg.validate(true));
}

TEST(Config, Profiles) {
  const auto& m = find_profile("mulargia");
  EXPECT_EQ(m.n_s, 92);
  EXPECT_EQ(m.sigma_pre, 2.5299e-10);
  EXPECT_EQ(m.sigma_post, 1.5561e-10);
  const auto& o = find_profile("omodeo");
  EXPECT_EQ(o.sigma_pre, 2.793e-11);
  EXPECT_EQ(o.sigma_post, 1.6533e-10);
  EXPECT_EQ(o.ab_power, 3);
  EXPECT_THROW(find_profile("nope"), Error);
}

TEST(Config, FileAndFieldRoundTrip) {
  TempDir dir;
  write_text_atomic(dir / "run.toml", "# comment\n[run]\nn_s = 40\nsigma_pre = 1e-3  # inline\nsigma_post = \"2e-3\"\ndiff_mode = signed\n"
                                      "sampler = grid\nindefinite = jitter\n");
  RunConfig cfg;
  apply_config_file(cfg, dir / "run.toml");
  EXPECT_EQ(cfg.n_s, 40);
  EXPECT_EQ(cfg.sigma_pre, 1e-3);
  EXPECT_EQ(cfg.sigma_post, 2e-3);
  EXPECT_EQ(cfg.diff_mode, DiffMode::signed_diff);
  EXPECT_EQ(cfg.sampler, SamplerKind::grid);
  EXPECT_EQ(cfg.indefinite, IndefiniteHandling::jitter);

  RunConfig copy;
  for (const auto& [k, v] : config_fields(cfg))
    if (k != "profile") set_config_field(copy, k, v);
  EXPECT_EQ(config_fields(copy), config_fields(cfg));

  write_text_atomic(dir / "bad.toml", "colour = red\n");
  EXPECT_EQ(code_of([&] { apply_config_file(cfg, dir / "bad.toml"); }), 2);
  write_text_atomic(dir / "bad2.toml", "n_s = many\n");
  EXPECT_EQ(code_of([&] { apply_config_file(cfg, dir / "bad2.toml"); }), 2);
  EXPECT_EQ(code_of([&] { apply_config_file(cfg, dir / "missing.toml"); }), 3);
}

TEST(Pipeline, SyntheticRunEmitsArtifacts) {
  TempDir dir;
  auto cfg = synthetic_run(dir);
  cfg.compare_ki = true;
  cfg.dump_eigen_images = 2;
  const auto out = run_pipeline(cfg);
  ASSERT_TRUE(out.metrics.has_value());
  EXPECT_GE(*out.metrics->kappa, 0.8);
  ASSERT_TRUE(out.ki_metrics.has_value());
  for (const char* f : {"change_map.png", "error_map.png", "metrics.json", "metrics.csv", "mi_curve.csv", "eigenvalues.csv",
                        "run_manifest.json", "selected_eigen_image.png", "eigen_image_0.png", "eigen_image_1.png"})
    EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / f)) << f;

  const auto csv = gbfcd::test::slurp(cfg.out_dir / "metrics.csv");
  EXPECT_EQ(csv.rfind("method,ma_pct", 0), 0u);
  EXPECT_NE(csv.find("\ngbf-cd,"), std::string::npos);
  EXPECT_NE(csv.find("\nki,"), std::string::npos);

  const auto manifest = nlohmann::json::parse(gbfcd::test::slurp(out.manifest));
  EXPECT_EQ(manifest["config"]["n_s"], "92");
  EXPECT_EQ(manifest["selected_index"], out.selected);
  EXPECT_TRUE(manifest.contains("jitter"));
  EXPECT_TRUE(manifest.contains("clamped_degrees"));
  EXPECT_TRUE(manifest.contains("eigen_version"));

  const auto map = load_mask(cfg.out_dir / "change_map.png");
  EXPECT_EQ(map.width, 64);
  const auto metrics = nlohmann::json::parse(gbfcd::test::slurp(cfg.out_dir / "metrics.json"));
  EXPECT_NEAR(metrics["gbf-cd"]["kappa"].get<double>(), *out.metrics->kappa, 1e-12);
}

TEST(Pipeline, ManifestReplayIsByteIdentical) {
  TempDir dir;
  const auto cfg = synthetic_run(dir, 3);
  const auto first = run_pipeline(cfg);
  for (const char* name : {"again1", "again2"}) {
    auto replay = load_manifest_config(first.manifest);
    replay.out_dir = dir / name;
    run_pipeline(replay);
    for (const char* f : {"metrics.csv", "mi_curve.csv", "eigenvalues.csv"})
      EXPECT_EQ(gbfcd::test::slurp(cfg.out_dir / f), gbfcd::test::slurp(dir / name / f)) << f;
  }
}

TEST(Pipeline, IdenticalInputsAreNumericalError) {
  TempDir dir;
  auto cfg = synthetic_run(dir);
  cfg.post_path = cfg.pre_path;
  try {
    run_pipeline(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.exit_code(), 4);
    EXPECT_NE(std::string(e.what()).find("degenerate"), std::string::npos);
  }
}

TEST(Pipeline, SizeMismatchAndMissingFile) {
  TempDir dir;
  auto cfg = synthetic_run(dir);
  write_raw(dir / "small.gbfr", RasterImage(8, 8));
  cfg.post_path = dir / "small.gbfr";
  EXPECT_EQ(code_of([&] { run_pipeline(cfg); }), 2);
  cfg.post_path = dir / "nothing.png";
  EXPECT_EQ(code_of([&] { run_pipeline(cfg); }), 3);
}

TEST(Pipeline, BlockDump) {
  TempDir dir;
  auto cfg = synthetic_run(dir);
  cfg.dump_blocks = true;
  cfg.ref_path.reset();
  run_pipeline(cfg);
  const auto ab = load_raster(cfg.out_dir / "affinity_fused_ab.gbfr");
  EXPECT_EQ(ab.width, 92);
  EXPECT_EQ(ab.height, 4096 - 92);
  EXPECT_FALSE(std::filesystem::exists(cfg.out_dir / "metrics.json"));
}

TEST(Pipeline, SigmaSweep) {
  TempDir dir;
  const auto cfg = synthetic_run(dir);
  const auto rows = sweep_sigma(cfg, 1e-4, 1e-2, 3);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[1].sigma, 1e-3, 1e-15);
  EXPECT_TRUE(rows[0].kappa.has_value());
  const auto csv = gbfcd::test::slurp(cfg.out_dir / "sigma_sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_THROW(sweep_sigma(cfg, 1e-2, 1e-4, 3), Error);
}

TEST(Pipeline, OracleReport) {
  SyntheticSpec spec;
  spec.width = spec.height = 8;
  spec.shape_width = spec.shape_height = 2;
  const auto scene = generate_synthetic(spec);
  RunConfig cfg;
  cfg.n_s = 64;
  cfg.ab_power = 1;
  cfg.sigma_pre = cfg.sigma_post = 5e-3;
  const auto r = compare_with_dense(scene.pre, scene.post, cfg);
  EXPECT_EQ(r.retained, 64);
  EXPECT_LT(r.max_eigenvalue_abs_diff, 1e-8);
  EXPECT_GT(r.min_abs_inner_product, 1 - 1e-6);
  EXPECT_LT(r.reconstruction_rel_frobenius, 1e-10);
}
