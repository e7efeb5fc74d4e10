#include "railzone/rail_gauge.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <opencv2/imgproc.hpp>

namespace railzone {

TrackRuns extract_track_runs(const LabelMask& mask, const ClassTable& table) {
  TrackRuns result;
  if (mask.empty()) return result;

  cv::Mat plane(mask.height(), mask.width(), CV_8U, cv::Scalar(0));
  bool any = false;
  for (int y = 0; y < mask.height(); ++y) {
    auto* dst = plane.ptr<std::uint8_t>(y);
    const auto src = mask.row(y);
    for (int x = 0; x < mask.width(); ++x)
      if (table.is_track(src[x])) {
        dst[x] = 1;
        any = true;
      }
  }
  if (!any) return result;

  cv::Mat labels;
  const int n = cv::connectedComponents(plane, labels, 4, CV_32S);

  // Renumber so ids do not depend on the labelling algorithm OpenCV picks.
  std::vector<int> renumber(static_cast<std::size_t>(n), 0);
  int next_id = 1;
  for (int y = 0; y < labels.rows; ++y) {
    const int* lab = labels.ptr<int>(y);
    for (int x = 0; x < labels.cols; ++x)
      if (lab[x] > 0 && renumber[static_cast<std::size_t>(lab[x])] == 0)
        renumber[static_cast<std::size_t>(lab[x])] = next_id++;
  }
  result.track_components = next_id - 1;

  std::vector<TrackRun> widest(static_cast<std::size_t>(next_id));
  std::vector<int> spans(static_cast<std::size_t>(next_id), 0);
  for (int y = 0; y < labels.rows; ++y) {
    std::fill(spans.begin(), spans.end(), 0);
    const int* lab = labels.ptr<int>(y);
    int x = 0;
    while (x < labels.cols) {
      if (lab[x] == 0) {
        ++x;
        continue;
      }
      const int raw = lab[x];
      const int start = x;
      while (x < labels.cols && lab[x] == raw) ++x;
      const int id = renumber[static_cast<std::size_t>(raw)];
      const TrackRun run{y, start, x - 1, id};
      auto& best = widest[static_cast<std::size_t>(id)];
      if (spans[static_cast<std::size_t>(id)]++ == 0 || run.width() > best.width()) best = run;
    }
    for (int id = 1; id < next_id; ++id) {
      const int count = spans[static_cast<std::size_t>(id)];
      if (count == 0) continue;
      if (count > 1) ++result.split_count;
      result.runs.push_back(widest[static_cast<std::size_t>(id)]);
    }
  }
  std::stable_sort(result.runs.begin(), result.runs.end(),
                   [](const TrackRun& a, const TrackRun& b) { return a.track_id < b.track_id; });
  return result;
}

GaugeProfile::GaugeProfile(std::vector<GaugeSample> samples, int track_components, double d_real_in_mm)
    : samples_(std::move(samples)), track_components_(track_components), d_real_in_mm_(d_real_in_mm) {
  std::sort(samples_.begin(), samples_.end(), [](const GaugeSample& a, const GaugeSample& b) {
    return a.row != b.row ? a.row < b.row : a.track_id < b.track_id;
  });
  for (const auto& s : samples_) {
    if (!(s.p_d > 0)) throw Error("gauge sample with non-positive p_d");
    auto& rows = by_track_[s.track_id];
    if (!rows.empty() && rows.back().first == s.row)
      throw Error("duplicate gauge sample for track " + std::to_string(s.track_id) + " at row " +
                  std::to_string(s.row));
    rows.emplace_back(s.row, s.p_d);
  }
}

double GaugeProfile::pixels_per_mm(int row, int track_id) const {
  const auto it = by_track_.find(track_id);
  if (it == by_track_.end()) throw Error("no gauge samples for track " + std::to_string(track_id));
  const auto& rows = it->second;
  const auto hi = std::lower_bound(rows.begin(), rows.end(), row,
                                   [](const std::pair<int, double>& s, int r) { return s.first < r; });
  if (hi != rows.end() && hi->first == row) return hi->second;
  if (hi == rows.begin()) return hi->second;
  if (hi == rows.end()) return rows.back().second;
  const auto lo = std::prev(hi);
  const double t = static_cast<double>(row - lo->first) / static_cast<double>(hi->first - lo->first);
  return lo->second + (hi->second - lo->second) * t;
}

OrderedJson GaugeProfile::to_json() const {
  auto out = OrderedJson::array();
  for (const auto& s : samples_)
    out.push_back({{"row", s.row}, {"track", s.track_id}, {"d_px", s.d_px_in}, {"p_d", s.p_d}});
  return out;
}

GaugeProfile build_gauge_profile(std::span<const TrackRun> runs, double d_real_in_mm, int min_width) {
  if (!(d_real_in_mm > 0) || !std::isfinite(d_real_in_mm))
    throw Error("reference gauge must be a positive length in millimetres");
  if (min_width < 1) throw Error("minimum gauge width must be >= 1 px");
  std::vector<GaugeSample> samples;
  std::set<int> tracks;
  for (const auto& run : runs) {
    tracks.insert(run.track_id);
    const int width = run.width();
    if (width < min_width) continue;
    samples.push_back({run.row, width, static_cast<double>(width) / d_real_in_mm, run.track_id});
  }
  return GaugeProfile(std::move(samples), static_cast<int>(tracks.size()), d_real_in_mm);
}

double metric_to_pixels(const GaugeProfile& profile, int row, int track_id, double d_real_out_mm) {
  return profile.pixels_per_mm(row, track_id) * d_real_out_mm;
}

}  // namespace railzone
