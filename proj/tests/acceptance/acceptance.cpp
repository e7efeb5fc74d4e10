// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "railzone/commands.hpp"
#include "railzone/mask_post.hpp"
#include "railzone/pipeline.hpp"
#include "railzone/rail_gauge.hpp"
#include "railzone/synth_oracle.hpp"
#include "railzone/violation.hpp"
#include "railzone/zone_assessor.hpp"
#include "scene_eval.hpp"
#include "support.hpp"

using namespace railzone;
namespace fs = std::filesystem;

namespace {

const fs::path kData = RAILZONE_DATA_DIR;
constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool ok = true;
  std::ostringstream note;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) note << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

// ---------------------------------------------------------------------------

void ac1(Outcome& o) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> px(8, 4000);
  std::uniform_real_distribution<double> real_in(100.0, 5000.0), real_out(1.0, 20000.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const int d_px = px(rng);
    const double d_in = real_in(rng), d_out = real_out(rng);
    // Neighbouring rows carry other widths so the lookup has something to miss.
    const int row = 5 + static_cast<int>(rng() % 50);
    std::vector<TrackRun> runs;
    for (int r = row - 3; r <= row + 3; ++r) {
      const int w = r == row ? d_px : d_px + (r - row) * 7 + 20;
      runs.push_back({r, 100, 100 + w - 1, 1});
    }
    const GaugeProfile profile = build_gauge_profile(runs, d_in, 8);
    const double got = metric_to_pixels(profile, row, 1, d_out);
    const double want = (static_cast<double>(d_px) / d_in) * d_out;
    const double rel = std::abs(got - want) / want;
    worst = std::max(worst, rel);
  }
  o.check(worst <= 1e-12, "relative error " + std::to_string(worst));
  o.note << "1000 triples, worst relative error " << worst << "; ";
}

// ---------------------------------------------------------------------------

struct SceneResult {
  std::size_t points = 0;
  double max_px = 0;
  double max_mm = 0;
};

SceneResult run_scene(const synth::SceneSpec& spec, const ClassTable& table) {
  const auto ev = railzone::testing::evaluate_scene(spec, table);
  return {ev.errors.size(), ev.max_px(), ev.max_mm()};
}

void ac2(Outcome& o) {
  const ClassTable table = railzone::testing::shipped_table();
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> focal(700, 1600), height(1800, 3500), pitch(0.15, 0.45),
      offset(-1500, 1500);
  const std::vector<std::pair<int, int>> sizes{{1280, 720}, {1920, 1080}, {1024, 768}};

  double straight_px = 0;
  std::size_t straight_points = 0;
  for (int i = 0; i < 25; ++i) {
    synth::SceneSpec spec;
    spec.camera.focal_px = focal(rng);
    spec.camera.height_mm = height(rng);
    spec.camera.pitch_rad = pitch(rng);
    std::tie(spec.camera.width, spec.camera.height) = sizes[rng() % sizes.size()];
    spec.track.lateral_offset_mm = offset(rng);
    spec.track.extent_mm = 60000;
    const auto r = run_scene(spec, table);
    o.check(r.points >= 200, "straight scene " + std::to_string(i) + " compared only " + std::to_string(r.points));
    o.check(r.max_px <= 2.0, "straight scene " + std::to_string(i) + " error " + std::to_string(r.max_px) + " px");
    straight_px = std::max(straight_px, r.max_px);
    straight_points += r.points;
  }

  double oblique_px = 0;
  for (double deg : {-15.0, -10.0, -5.0, 5.0, 10.0, 15.0}) {
    synth::SceneSpec spec;
    spec.track.heading_rad = deg * kDeg;
    spec.track.lateral_offset_mm = -deg * 60;  // keep the far end in view
    spec.track.extent_mm = 40000;
    const auto r = run_scene(spec, table);
    o.check(r.points >= 200, "oblique scene compared only " + std::to_string(r.points));
    o.check(r.max_px <= 4.0, "oblique " + std::to_string(deg) + " deg error " + std::to_string(r.max_px) + " px");
    oblique_px = std::max(oblique_px, r.max_px);
  }

  // Depot-like setup: close range, wide lens, camera at cab height.
  double curved_mm = 0;
  for (double radius : {50000.0, -50000.0, 80000.0, -80000.0, 200000.0, -200000.0}) {
    synth::SceneSpec spec;
    spec.camera = {1500, 2500, 0.25, 1920, 1080};
    spec.track.radius_mm = radius;
    spec.track.extent_mm = 20000;
    const auto r = run_scene(spec, table);
    o.check(r.points >= 200, "curved scene compared only " + std::to_string(r.points));
    o.check(r.max_mm <= 50.0, "curved R=" + std::to_string(radius) + " error " + std::to_string(r.max_mm) + " mm");
    curved_mm = std::max(curved_mm, r.max_mm);
  }
  o.note << "straight max " << straight_px << " px over " << straight_points << " boundary points, oblique max "
         << oblique_px << " px, curved max " << curved_mm << " mm; ";
}

// ---------------------------------------------------------------------------

// Checks the outer ring of the rectangle, which is always connected.
bool ignored_exactly(const BinaryGrid& ignore, int x0, int y0, int w, int h, bool expect) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) {
      const bool ring = y == y0 || y == y0 + h - 1 || x == x0 || x == x0 + w - 1;
      if (ring && (ignore(x, y) != 0) != expect) return false;
    }
  return true;
}

void ac3(Outcome& o) {
  const int void_id = 255;
  for (auto [w, h, expect] : {std::tuple{12, 12, true}, {13, 12, false}, {12, 13, false}, {1, 1, true}}) {
    LabelMask m(40, 40, 255);
    for (int y = 5; y < 5 + h; ++y)
      for (int x = 7; x < 7 + w; ++x) m(x, y) = 3;
    const auto r = suppress_small_patches(m, {12}, void_id);
    o.check(ignored_exactly(r.ignore, 7, 5, w, h, expect),
            std::to_string(w) + "x" + std::to_string(h) + " block misclassified");
  }

  // Planted rectangles in separate 24x24 cells with a solid ring, so each is
  // one component whose bounding box is the rectangle. Interior pixels are
  // dropped at random and may leave small islands, covered by the oracle.
  std::mt19937 rng(3);
  std::size_t planted = 0, boundary_cases = 0;
  for (int n = 0; n < 500; ++n) {
    const int cells = 3;
    LabelMask m(24 * cells, 24 * cells, 255);
    struct Plant {
      int x, y, w, h;
    };
    std::vector<Plant> plants;
    for (int cy = 0; cy < cells; ++cy)
      for (int cx = 0; cx < cells; ++cx) {
        if (rng() % 4 == 0) continue;
        // Bias sizes toward the 12/13 boundary.
        auto side = [&] { return rng() % 2 ? 11 + static_cast<int>(rng() % 4) : 1 + static_cast<int>(rng() % 22); };
        const int w = side(), h = side();
        const int x = 24 * cx + 1 + static_cast<int>(rng() % static_cast<unsigned>(23 - w));
        const int y = 24 * cy + 1 + static_cast<int>(rng() % static_cast<unsigned>(23 - h));
        const auto cls = static_cast<ClassId>(std::vector<int>{3, 5, 10, 12, 13}[rng() % 5]);
        for (int yy = y; yy < y + h; ++yy)
          for (int xx = x; xx < x + w; ++xx) {
            const bool ring = yy == y || yy == y + h - 1 || xx == x || xx == x + w - 1;
            if (ring || rng() % 3) m(xx, yy) = cls;
          }
        plants.push_back({x, y, w, h});
        boundary_cases += (w == 12 || w == 13) && (h == 12 || h == 13);
      }
    const auto r = suppress_small_patches(m, {12}, void_id);
    for (const auto& p : plants) {
      const bool expect = p.w <= 12 && p.h <= 12;
      o.check(ignored_exactly(r.ignore, p.x, p.y, p.w, p.h, expect),
              "planted " + std::to_string(p.w) + "x" + std::to_string(p.h) + " in mask " + std::to_string(n));
    }
    o.check(r.ignore == railzone::oracle::small_patch_ignore(m, 12, void_id), "oracle mismatch in mask " + std::to_string(n));
    planted += plants.size();
  }
  o.note << "500 masks, " << planted << " planted components (" << boundary_cases << " at 12/13 sides); ";
}

// ---------------------------------------------------------------------------

std::vector<Detection> toy_boxes(std::mt19937& rng, const std::vector<Detection>* near, bool scored) {
  std::uniform_real_distribution<double> pos(0, 60), size(8, 30), jitter(-6, 6);
  std::vector<Detection> out;
  const int n = 1 + static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) {
    Detection d;
    if (near && !near->empty() && rng() % 3 != 0) {
      const auto& g = (*near)[rng() % near->size()];
      d.class_name = rng() % 5 ? g.class_name : (g.class_name == "person" ? "car" : "person");
      d.image_id = g.image_id;
      d.bbox = {g.bbox.x + jitter(rng), g.bbox.y + jitter(rng), std::max(2.0, g.bbox.w + jitter(rng)),
                std::max(2.0, g.bbox.h + jitter(rng))};
    } else {
      d.class_name = rng() % 2 ? "person" : "car";
      d.image_id = rng() % 2 ? "a" : "b";
      d.bbox = {pos(rng), pos(rng), size(rng), size(rng)};
    }
    out.push_back(d);
  }
  if (scored) {
    // Distinct scores.
    std::vector<int> ranks(out.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = static_cast<int>(i);
    std::shuffle(ranks.begin(), ranks.end(), rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].score = 0.1 + 0.1 * ranks[i];
  }
  return out;
}

void ac4(Outcome& o) {
  const ClassTable table = railzone::testing::small_table();
  std::mt19937 rng(4);
  for (int n = 0; n < 200; ++n) {
    const std::vector<int> classes{1, 2, 3, 5, 6, 255};
    const LabelMask pred = railzone::testing::random_mask(rng, 16, 16, classes);
    const LabelMask gt = railzone::testing::random_mask(rng, 16, 16, classes);
    const BinaryGrid ignore = patch_ignore_union(pred, gt, {0}, table.void_id());
    const SegScore s = seg_iou(pred, gt, ignore, table);
    railzone::oracle::PixelCounts pc;
    railzone::oracle::count_pixels(pred, gt, BinaryGrid(16, 16, 0), pc);
    double sum = 0;
    int k = 0;
    for (int c : {1, 2, 3, 4, 5, 6}) {
      const auto want = railzone::oracle::iou(pc, c);
      o.check(s.per_class_iou.at(c) == want, "IoU of class " + std::to_string(c) + " in pair " + std::to_string(n));
      if (want) sum += *want, ++k;
    }
    o.check(s.mean_iou == (k ? sum / k : 0.0), "mean IoU in pair " + std::to_string(n));
  }

  double worst = 0;
  for (int n = 0; n < 50; ++n) {
    const auto gt = toy_boxes(rng, nullptr, false);
    const auto pred = toy_boxes(rng, &gt, true);
    const DetScore s = det_map50(pred, gt);
    const double want = railzone::oracle::map50_by_thresholds(pred, gt);
    worst = std::max(worst, std::abs(s.mean_ap50 - want));
    for (const auto& [cls, cs] : s.per_class)
      worst = std::max(worst, std::abs(cs.ap50 - railzone::oracle::ap50_by_thresholds(pred, gt, cls)));
  }
  o.check(worst <= 1e-9, "mAP50 deviation " + std::to_string(worst));
  o.note << "200 mask pairs exact, 50 detection sets worst AP deviation " << worst << "; ";
}

// ---------------------------------------------------------------------------

void ac5(Outcome& o) {
  const ClassTable table = railzone::testing::shipped_table();
  std::mt19937 rng(5);
  const int W = 160, H = 90;
  int configs = 0, nonzero = 0;
  while (configs < 200) {
    // Vertical bands around a track, all widths random.
    const int t0 = 40 + static_cast<int>(rng() % 60), t1 = t0 + 2 + static_cast<int>(rng() % 20);
    const int br = 1 + static_cast<int>(rng() % 8), bo = br + 1 + static_cast<int>(rng() % 8),
              by = bo + 1 + static_cast<int>(rng() % 12);
    CriticalZoneMap z;
    z.raster = Grid<ZoneLevel>(W, H, ZoneLevel::None);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const int d = x < t0 ? t0 - x : (x > t1 ? x - t1 : 0);
        z.raster(x, y) = d <= br ? ZoneLevel::Red : d <= bo ? ZoneLevel::Orange : d <= by ? ZoneLevel::Yellow : ZoneLevel::None;
      }
    // Integer boxes with sides divisible by three: the 12 points are exact.
    const int w = 3 * (1 + static_cast<int>(rng() % 15)), h = 3 * (1 + static_cast<int>(rng() % 10));
    const int x = static_cast<int>(rng() % static_cast<unsigned>(W - w)), y = static_cast<int>(rng() % static_cast<unsigned>(H - h));
    ZoneLevel hand = ZoneLevel::None;
    for (int k = 0; k < 4; ++k) {
      const int xs = x + k * w / 3, ys = y + k * h / 3;
      for (auto [px, py] : {std::pair{xs, y}, {xs, y + h}, {x, ys}, {x + w, ys}}) hand = std::max(hand, z.raster(px, py));
    }
    DetectionSet set{{}, W, H};
    for (const char* cls : {"person", "car", "backpack", "mystery"}) {
      Detection d;
      d.class_name = cls;
      d.bbox = {double(x), double(y), double(w), double(h)};
      set.detections.push_back(d);
    }
    const auto r = classify(set, z, table);
    const auto& v = r.verdicts;
    const std::string where = "config " + std::to_string(configs);
    for (const auto& verdict : v) o.check(verdict.raw_zone == hand, where + " raw zone");
    o.check(v[0].criticality == static_cast<Criticality>(hand), where + " person");
    o.check(v[1].criticality == static_cast<Criticality>(hand), where + " car");
    const auto demoted = static_cast<Criticality>(std::max(0, static_cast<int>(hand) - 1));
    o.check(v[2].criticality == demoted, where + " backpack");
    o.check(v[3].criticality == demoted, where + " unclassified");
    o.check(v[0].criticality >= v[2].criticality && v[1].criticality >= v[2].criticality, where + " ordering");
    nonzero += hand != ZoneLevel::None;
    ++configs;
  }
  o.check(nonzero >= 50, "too few violating configurations");
  o.note << configs << " configurations, " << nonzero << " violating; ";
}

// ---------------------------------------------------------------------------

struct NamedMask {
  std::string name;
  LabelMask mask;
};

void ac6(Outcome& o) {
  const ClassTable table = railzone::testing::shipped_table();
  RunConfig config;
  config.class_table_path = default_class_table_path();
  std::vector<NamedMask> scenes;
  scenes.push_back({"fixture", load_mask(kData / "fixture/mask.png", table).mask});
  for (const char* s : {"straight", "curved", "oblique", "fixture"}) {
    std::ifstream in(kData / "scenes" / (std::string(s) + ".json"));
    const auto spec = synth::SceneSpec::from_json(nlohmann::json::parse(in));
    scenes.push_back({std::string("scene ") + s, synth::render_scene(spec).mask});
  }
  std::mt19937 rng(6);
  for (int i = 0; i < 6; ++i) {
    synth::SceneSpec spec;
    spec.camera.width = 640;
    spec.camera.height = 360;
    spec.camera.focal_px = 500;
    spec.track.lateral_offset_mm = static_cast<double>(static_cast<int>(rng() % 2000) - 1000);
    if (i % 3 == 1) spec.track.heading_rad = (i - 3) * 3 * kDeg;
    if (i % 3 == 2) spec.track.radius_mm = (i % 2 ? 1 : -1) * 60000.0, spec.track.extent_mm = 25000;
    scenes.push_back({"random scene " + std::to_string(i), synth::render_scene(spec).mask});
  }

  auto red_region = [&](const Assessment& a, double d) {
    ZoneSpec s{{d, d + 1, d + 2}, true};
    const auto z = estimate_zones(a.mask, table, a.runs, a.profile, s);
    std::vector<bool> out(a.mask.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = z.raster.data()[i] == ZoneLevel::Red;
    return out;
  };

  for (const auto& s : scenes) {
    const DetectionSet none{{}, s.mask.width(), s.mask.height()};
    const Assessment a = assess(s.mask, none, table, config);
    const auto r = red_region(a, 600), or_ = red_region(a, 1000), y = red_region(a, 2000);
    bool nested = true, consistent = true;
    for (std::size_t i = 0; i < r.size(); ++i) {
      nested = nested && (!r[i] || or_[i]) && (!or_[i] || y[i]);
      const ZoneLevel lvl = a.zones.raster.data()[i];
      consistent = consistent && r[i] == (lvl >= ZoneLevel::Red) && or_[i] == (lvl >= ZoneLevel::Orange) &&
                   y[i] == (lvl >= ZoneLevel::Yellow);
    }
    o.check(nested, s.name + " not nested");
    o.check(consistent, s.name + " raster disagrees with single-distance regions");

    const Assessment m = assess(mirror_horizontal(s.mask), none, table, config);
    o.check(m.zones.raster == mirror_horizontal(a.zones.raster), s.name + " mirror");
  }
  o.note << scenes.size() << " scenes nested and mirror-exact; ";
}

// ---------------------------------------------------------------------------

void ac7(Outcome& o) {
  railzone::testing::TempDir tmp;
  std::vector<std::string> reports, overlays, zones;
  for (int i = 0; i < 3; ++i) {
    RunConfig config;
    config.class_table_path = default_class_table_path();
    config.output_dir = tmp / ("run" + std::to_string(i));
    config.quiet = true;
    std::ostringstream out, err;
    const int code = cmd_assess({kData / "fixture/mask.png", kData / "fixture/detections.jsonl", {}, false}, config,
                                out, err);
    o.check(code == kExitRedAlarm, "exit code " + std::to_string(code) + " " + err.str());
    reports.push_back(railzone::testing::read_text(config.output_dir / "report.json"));
    overlays.push_back(railzone::testing::read_text(config.output_dir / "overlay.png"));
    zones.push_back(railzone::testing::read_text(config.output_dir / "zones.png"));
  }
  o.check(!reports[0].empty() && !overlays[0].empty(), "missing outputs");
  for (int i = 1; i < 3; ++i) {
    o.check(reports[i] == reports[0], "report.json differs");
    o.check(overlays[i] == overlays[0], "overlay.png differs");
    o.check(zones[i] == zones[0], "zones.png differs");
  }
  o.note << "3 runs byte-identical (" << reports[0].size() << " B report, " << overlays[0].size() << " B overlay); ";
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    double budget_s;  // 0 = no runtime bound
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1", "gauge conversion exactness", 1.0, ac1},
      {"AC2", "synthetic depot boundaries", 30.0, ac2},
      {"AC3", "patch filter boundary", 5.0, ac3},
      {"AC4", "metric oracle equivalence", 10.0, ac4},
      {"AC5", "classifier contract", 0.0, ac5},
      {"AC6", "zone nesting and symmetry", 0.0, ac6},
      {"AC7", "end-to-end determinism", 0.0, ac7},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.check(secs < c.budget_s, "runtime " + std::to_string(secs) + " s");
    std::printf("%s %s: %s (%.2f s) %s\n", c.id, o.ok ? "PASS" : "FAIL", c.title, secs, o.note.str().c_str());
    failed += !o.ok;
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
