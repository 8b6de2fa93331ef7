#include "socnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace socnav {

MetricsConfig load_metrics_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open metrics config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("metrics config parse error: ") + e.what());
  }
  MetricsConfig c;
  c.below_band_slope = j.value("below_band_slope", c.below_band_slope);
  c.above_band_slope = j.value("above_band_slope", c.above_band_slope);
  c.keep_away_safe_distance = j.value("keep_away_safe_distance", c.keep_away_safe_distance);
  c.region_cap_per_region = j.value("region_cap_per_region", c.region_cap_per_region);
  c.collision_fails_episode = j.value("collision_fails_episode", c.collision_fails_episode);
  return c;
}

std::optional<double> curvature_smoothness(const std::vector<TrajectorySample>& samples) {
  if (samples.size() < 3) return std::nullopt;

  // Merge segments shorter than 1 cm so sensor-scale jitter does not read
  // as turning.
  constexpr double kMinSegment = 0.01;
  std::vector<Vec2> points;
  points.push_back(samples.front().pose.position());
  for (size_t i = 1; i < samples.size(); ++i) {
    Vec2 p = samples[i].pose.position();
    if ((p - points.back()).norm() >= kMinSegment) points.push_back(p);
  }
  if (points.size() < 3) return 0.0;  // no two segments to compare

  double total = 0.0;
  double prev_heading = (points[1] - points[0]).angle();
  for (size_t i = 2; i < points.size(); ++i) {
    double heading = (points[i] - points[i - 1]).angle();
    total += std::abs(wrap(heading - prev_heading));
    prev_heading = heading;
  }
  return total;
}

std::string MetricsConfig::canonical_text() const {
  std::ostringstream ss;
  ss << "below_band_slope=" << below_band_slope << ";above_band_slope=" << above_band_slope
     << ";keep_away_safe_distance=" << keep_away_safe_distance
     << ";region_cap_per_region=" << region_cap_per_region
     << ";collision_fails_episode=" << (collision_fails_episode ? 1 : 0);
  return ss.str();
}

std::string MetricsConfig::hash() const {
  // FNV-1a over the canonical text.
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

double subject_tick_score(const SubjectTrack& subject, double d, const MetricsConfig& config) {
  if (subject.mode == SubjectScoreMode::FollowBand) {
    if (d >= subject.d_min && d <= subject.d_max) return 100.0;
    if (d < subject.d_min) {
      double s = 100.0 - config.below_band_slope * (subject.d_min - d) / subject.d_min;
      return std::max(0.0, s);
    }
    double s = 100.0 - config.above_band_slope * (d - subject.d_max);
    return std::max(0.0, s);
  }
  // Keep-away: full score beyond the safe distance, linear penalty inside.
  return 100.0 * std::min(1.0, d / config.keep_away_safe_distance);
}

std::optional<double> subject_score(const std::vector<SubjectTrack>& subjects,
                                    const MetricsConfig& config) {
  if (subjects.empty()) return std::nullopt;
  double subject_sum = 0.0;
  int counted = 0;
  for (const auto& s : subjects) {
    if (s.distances.empty()) continue;
    double tick_sum = 0.0;
    for (double d : s.distances) tick_sum += subject_tick_score(s, d, config);
    subject_sum += tick_sum / static_cast<double>(s.distances.size());
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return subject_sum / counted;
}

std::optional<double> region_score(const RegionOccupancy& occupancy,
                                   const std::vector<Region>& regions,
                                   const MetricsConfig& config) {
  std::vector<const Region*> scored;
  for (const auto& r : regions)
    if (r.kind == RegionKind::Forbidden || r.kind == RegionKind::Caution) scored.push_back(&r);
  if (scored.empty()) return std::nullopt;
  if (occupancy.empty()) return 100.0;

  double total_penalty = 0.0;
  for (const Region* region : scored) {
    double severity_sum = 0.0;
    for (const auto& tick_regions : occupancy) {
      if (std::find(tick_regions.begin(), tick_regions.end(), region->id) != tick_regions.end())
        severity_sum += region->severity_weight;
    }
    double mean_severity = severity_sum / static_cast<double>(occupancy.size());
    total_penalty += std::min(mean_severity, config.region_cap_per_region);
  }
  return std::max(0.0, 100.0 - total_penalty);
}

std::map<std::string, LatencyStats> latency_stats(const std::vector<LatencySample>& log) {
  std::map<std::string, std::vector<double>> buckets;
  for (const auto& s : log) buckets[s.component].push_back(s.ms);

  std::map<std::string, LatencyStats> out;
  for (auto& [component, values] : buckets) {
    std::sort(values.begin(), values.end());
    LatencyStats stats;
    stats.count = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    stats.mean = sum / values.size();
    auto rank = [&](double q) {
      size_t i = static_cast<size_t>(q * values.size());
      return values[std::min(i, values.size() - 1)];
    };
    stats.p50 = rank(0.5);
    stats.p95 = rank(0.95);
    stats.max = values.back();
    out[component] = stats;
  }
  return out;
}

}  // namespace socnav
