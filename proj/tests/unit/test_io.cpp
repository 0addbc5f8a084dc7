#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "morphkit/dataset.hpp"
#include "morphkit/error.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/run_io.hpp"
#include "morphkit/toy_backend.hpp"
#include "test_helpers.hpp"

using namespace morphkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("morphkit_io_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MorphResult small_run(const Image& l, const Image& r, std::uint64_t seed = 1) {
  static ToyBackend backend(0, 10);
  MorphRequest req;
  req.left_image = l;
  req.right_image = r;
  req.prompt_left = "left";
  req.prompt_right = "right";
  req.config.steps = 10;
  req.config.frames = 2;
  req.config.seed = seed;
  return morph(req, backend);
}

}  // namespace

TEST_CASE("png roundtrip on the 8-bit grid") {
  TempDir dir("png");
  Image im = quantize_8bit(testutil::smooth_image(20, 12, 1));
  save_png(im, (dir.path / "a.png").string());
  Image back = load_png((dir.path / "a.png").string());
  CHECK(back.width == 20);
  CHECK(back.height == 12);
  CHECK(max_abs_diff(back, im) <= 1e-6);
  try {
    load_png((dir.path / "missing.png").string());
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("missing.png") != std::string::npos);
  }
  Image sheet = contact_sheet(std::vector<Image>{im, im, im});
  CHECK(sheet.width == 60);
  CHECK(sheet.height == 12);
  Image up = resize_bicubic(Image(8, 8, 0.25f), 17, 5);
  CHECK(up.width == 17);
  for (float v : up.rgb) CHECK(v == doctest::Approx(0.25f).epsilon(1e-5));
}

TEST_CASE("dataset manifest parsing") {
  const std::string text = R"({"version": 1, "entries": [
    {"pair_id": "p1", "left_path": "a.png", "right_path": "/abs/b.png", "class": "B", "prompt_left": "x"},
    {"pair_id": "p2", "left_path": "c.png", "right_path": "d.png", "class": "D"}]})";
  DatasetManifest m = parse_dataset_manifest(text, "/data");
  CHECK(m.version == "1");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].left_path == "/data/a.png");
  CHECK(m.entries[0].right_path == "/abs/b.png");
  CHECK(m.entries[0].pair_class == PairClass::B);
  CHECK(m.entries[0].prompt_left == "x");
  CHECK_FALSE(m.entries[0].prompt_right.has_value());
  CHECK(m.entries[1].pair_class == PairClass::D);
  DatasetManifest again = parse_dataset_manifest(dataset_manifest_to_json(m));
  CHECK(again.entries.size() == 2);
  CHECK(again.entries[1].right_path == "/data/d.png");

  auto code = [](const std::string& t) {
    try {
      parse_dataset_manifest(t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::invalid_argument;
  };
  CHECK(code("{") == ErrorCode::config);
  CHECK(code(R"({"version": "1"})") == ErrorCode::config);
  CHECK(code(R"({"entries": [{"pair_id": "p", "left_path": "a", "right_path": "b", "class": "E"}]})") == ErrorCode::config);
  CHECK(code(R"({"entries": [{"pair_id": "p", "left_path": "a", "right_path": "b", "class": "A"},
                             {"pair_id": "p", "left_path": "a", "right_path": "b", "class": "A"}]})") == ErrorCode::config);
  CHECK(code(R"({"entries": [{"pair_id": "../x", "left_path": "a", "right_path": "b", "class": "A"}]})") == ErrorCode::config);
  CHECK_THROWS_AS(load_dataset_manifest("/nonexistent/manifest.json"), Error);
}

TEST_CASE("run directories are self-describing") {
  TempDir dir("run");
  Image l = testutil::smooth_image(128, 128, 0), r = testutil::smooth_image(128, 128, 1);
  MorphResult res = small_run(l, r);
  write_run(res, (dir.path / "p1").string());
  for (const char* f : {"000.png", "001.png", "002.png", "003.png", "contact_sheet.png", "input_left.png",
                        "input_right.png", "manifest.txt"})
    CHECK(fs::exists(dir.path / "p1" / f));
  CHECK_FALSE(fs::exists(dir.path / "p1" / "004.png"));

  LoadedRun loaded = load_run((dir.path / "p1").string());
  CHECK(loaded.frames.size() == 4);
  CHECK(loaded.inputs.size() == 2);
  CHECK(loaded.manifest.get("latent.checksum") == res.manifest.get("latent.checksum"));
  CHECK(parse_config(loaded.manifest.to_text()) == parse_config(res.manifest.to_text()));
  CHECK_THROWS_AS(load_run((dir.path / "nope").string()), Error);

  write_run(res, (dir.path / "orig").string(), EndpointFrames::original);
  LoadedRun orig = load_run((dir.path / "orig").string());
  CHECK(max_abs_diff(orig.frames.front(), quantize_8bit(res.left_input)) <= 1e-6);
  CHECK(orig.manifest.get("output.endpoints") == "original");
}

TEST_CASE("evaluating two pairs writes rows and an aggregate") {
  TempDir dir("eval");
  Image l = testutil::smooth_image(128, 128, 0), r = testutil::smooth_image(128, 128, 1);
  save_png(l, (dir.path / "l.png").string());
  save_png(r, (dir.path / "r.png").string());
  std::ofstream(dir.path / "manifest.json") << R"({"version": "1", "entries": [
    {"pair_id": "p1", "left_path": "l.png", "right_path": "r.png", "class": "A"},
    {"pair_id": "p2", "left_path": "r.png", "right_path": "l.png", "class": "C"},
    {"pair_id": "p3", "left_path": "l.png", "right_path": "l.png", "class": "B"}]})";
  write_run(small_run(l, r, 1), (dir.path / "runs" / "p1").string());
  write_run(small_run(r, l, 2), (dir.path / "runs" / "p2").string());
  const std::string results = (dir.path / "results.tsv").string();

  EvaluationReport rep = evaluate_runs((dir.path / "manifest.json").string(), (dir.path / "runs").string(),
                                       "random_projection", results);
  REQUIRE(rep.rows.size() == 2);
  REQUIRE(rep.skipped.size() == 1);
  CHECK(rep.skipped[0].rfind("p3", 0) == 0);
  CHECK(rep.rows[0].pair_id == "p1");
  CHECK(rep.rows[0].frame_count == 4);
  CHECK(rep.aggregate.pair_id == "aggregate");
  CHECK(rep.aggregate.fid_mean == doctest::Approx((rep.rows[0].fid_mean + rep.rows[1].fid_mean) / 2));
  CHECK(rep.aggregate.lpips_sum == doctest::Approx(rep.rows[0].lpips_sum + rep.rows[1].lpips_sum));

  std::string tsv = slurp(results);
  std::istringstream lines(tsv);
  std::vector<std::string> all;
  for (std::string line; std::getline(lines, line);) all.push_back(line);
  REQUIRE(all.size() == 4);
  CHECK(all[0].rfind("manifest_hash\tpair_id", 0) == 0);
  CHECK(all[3].find("\taggregate\t") != std::string::npos);
  CHECK(format_report(rep.rows[0]).find("lpips_sum") != std::string::npos);

  // runs whose frames equal their references
  TempDir same("same");
  std::ofstream(same.path / "manifest.json")
      << R"({"entries": [{"pair_id": "s", "left_path": ")" + (dir.path / "l.png").string() +
             R"(", "right_path": ")" + (dir.path / "l.png").string() + R"(", "class": "B"}]})";
  fs::create_directories(same.path / "runs" / "s");
  Image q = load_png((dir.path / "l.png").string());
  save_png(q, (same.path / "runs" / "s" / "000.png").string());
  save_png(q, (same.path / "runs" / "s" / "001.png").string());
  EvaluationReport zero =
      evaluate_runs((same.path / "manifest.json").string(), (same.path / "runs").string(), "random_projection");
  REQUIRE(zero.rows.size() == 1);
  CHECK(zero.rows[0].lpips_sum == 0.0);
  CHECK(zero.rows[0].fid_mean <= 1e-6);
  try {
    evaluate_runs((same.path / "manifest.json").string(), (same.path / "runs").string(), "identity");
    FAIL("expected an error for 49152-dim pixel features");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
}
