#include "socnav/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace socnav {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool metric_equal(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || *a == *b;
}

}  // namespace

void export_trajectory_csv(const EpisodeReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write csv file: " + path);
  f << "t,x,y,theta,v,omega,regions\n";
  for (size_t i = 0; i < report.trajectory.size(); ++i) {
    const auto& s = report.trajectory[i];
    f << fmt_double(s.t) << "," << fmt_double(s.pose.x) << "," << fmt_double(s.pose.y) << ","
      << fmt_double(s.pose.theta) << "," << fmt_double(s.v) << "," << fmt_double(s.omega) << ",";
    if (i < report.region_occupancy.size()) {
      const auto& regions = report.region_occupancy[i];
      for (size_t k = 0; k < regions.size(); ++k) {
        if (k) f << "|";
        f << regions[k];
      }
    }
    f << "\n";
  }
}

CsvIngest ingest_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open csv file: " + path);

  CsvIngest out;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("csv file is empty: " + path);
  if (line.rfind("t,x,y", 0) != 0) throw std::runtime_error("unexpected csv header: " + line);

  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 6) throw std::runtime_error("truncated csv row: " + line);

    TrajectorySample s;
    s.t = std::stod(fields[0]);
    s.pose = {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
    s.v = std::stod(fields[4]);
    s.omega = std::stod(fields[5]);
    if (!out.trajectory.empty() && s.t <= out.trajectory.back().t)
      throw std::runtime_error("csv timestamps must be strictly increasing");
    out.trajectory.push_back(s);

    std::vector<std::string> regions;
    if (fields.size() >= 7 && !fields[6].empty()) {
      std::stringstream rs(fields[6]);
      std::string id;
      while (std::getline(rs, id, '|')) regions.push_back(id);
    }
    out.occupancy.push_back(std::move(regions));
  }
  return out;
}

void export_trajectory_svg(const EpisodeReport& report, const ScenarioSpec* scenario,
                           const std::string& path) {
  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
  if (scenario) {
    min_x = scenario->static_map.min_x();
    min_y = scenario->static_map.min_y();
    max_x = scenario->static_map.max_x();
    max_y = scenario->static_map.max_y();
  } else if (!report.trajectory.empty()) {
    min_x = max_x = report.trajectory.front().pose.x;
    min_y = max_y = report.trajectory.front().pose.y;
    for (const auto& s : report.trajectory) {
      min_x = std::min(min_x, s.pose.x);
      max_x = std::max(max_x, s.pose.x);
      min_y = std::min(min_y, s.pose.y);
      max_y = std::max(max_y, s.pose.y);
    }
    min_x -= 1.0;
    min_y -= 1.0;
    max_x += 1.0;
    max_y += 1.0;
  }

  const double scale = 40.0;  // px per meter
  double w = (max_x - min_x) * scale, h = (max_y - min_y) * scale;
  auto X = [&](double x) { return (x - min_x) * scale; };
  auto Y = [&](double y) { return h - (y - min_y) * scale; };  // svg y grows down

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write svg file: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (scenario) {
    const auto& map = scenario->static_map;
    // Merge occupied runs per row to keep the file small.
    f << "<g fill=\"#444444\">\n";
    for (int r = 0; r < map.height(); ++r) {
      int c = 0;
      while (c < map.width()) {
        if (!map.occupied(r, c)) {
          ++c;
          continue;
        }
        int c0 = c;
        while (c < map.width() && map.occupied(r, c)) ++c;
        double x0 = map.min_x() + c0 * map.resolution();
        double y0 = map.min_y() + r * map.resolution();
        f << "<rect x=\"" << X(x0) << "\" y=\"" << Y(y0 + map.resolution()) << "\" width=\""
          << (c - c0) * map.resolution() * scale << "\" height=\"" << map.resolution() * scale
          << "\"/>\n";
      }
    }
    f << "</g>\n";

    for (const auto& region : scenario->regions) {
      const char* fill = region.kind == RegionKind::Forbidden ? "#f5b7b1"
                         : region.kind == RegionKind::Caution ? "#fdebd0"
                         : region.kind == RegionKind::Goal    ? "#d5f5e3"
                                                              : "#eaecee";
      f << "<polygon points=\"";
      for (const auto& p : region.polygon) f << X(p.x) << "," << Y(p.y) << " ";
      f << "\" fill=\"" << fill << "\" stroke=\"#888888\" stroke-width=\"1\" opacity=\"0.8\"/>\n";
      Vec2 c = region.centroid();
      f << "<text x=\"" << X(c.x) << "\" y=\"" << Y(c.y)
        << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#555555\">" << region.id
        << "</text>\n";
    }

    for (const auto& ped : scenario->pedestrians) {
      f << "<polyline points=\"";
      for (const auto& wp : ped.trajectory) f << X(wp.p.x) << "," << Y(wp.p.y) << " ";
      f << "\" fill=\"none\" stroke=\"#e67e22\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";
      if (!ped.trajectory.empty()) {
        f << "<text x=\"" << X(ped.trajectory.front().p.x) << "\" y=\""
          << Y(ped.trajectory.front().p.y) << "\" font-size=\"9\" fill=\"#e67e22\">" << ped.identity
          << "</text>\n";
      }
    }
  }

  f << "<polyline points=\"";
  for (const auto& s : report.trajectory) f << X(s.pose.x) << "," << Y(s.pose.y) << " ";
  f << "\" fill=\"none\" stroke=\"#2471a3\" stroke-width=\"2\"/>\n";

  // Directive markers at their application points along the robot path.
  for (const auto& d : report.directives) {
    const TrajectorySample* at = nullptr;
    for (const auto& s : report.trajectory) {
      if (s.t + 1e-9 >= d.at) {
        at = &s;
        break;
      }
    }
    if (!at) continue;
    f << "<circle cx=\"" << X(at->pose.x) << "\" cy=\"" << Y(at->pose.y)
      << "\" r=\"4\" fill=\"#8e44ad\"/>\n";
    f << "<text x=\"" << X(at->pose.x) + 5 << "\" y=\"" << Y(at->pose.y) - 5
      << "\" font-size=\"9\" fill=\"#8e44ad\">" << mode_name(d.directive.mode) << "</text>\n";
  }

  if (!report.trajectory.empty()) {
    const auto& s0 = report.trajectory.front();
    f << "<circle cx=\"" << X(s0.pose.x) << "\" cy=\"" << Y(s0.pose.y)
      << "\" r=\"5\" fill=\"none\" stroke=\"#2471a3\" stroke-width=\"2\"/>\n";
  }
  f << "</svg>\n";
}

ReplayResult replay_report(const EpisodeReport& report, const MetricsConfig& config) {
  ReplayResult out;
  out.config_mismatch = config.hash() != report.metrics_config_hash;
  out.recomputed = compute_episode_metrics(report, config);

  const MetricValues& a = out.recomputed;
  const MetricValues& b = report.metrics;
  out.values_match = a.success == b.success && a.failure_reason == b.failure_reason &&
                     a.collision_count == b.collision_count &&
                     metric_equal(a.smoothness, b.smoothness) &&
                     metric_equal(a.smoothness_score, b.smoothness_score) &&
                     metric_equal(a.subject, b.subject) && metric_equal(a.region, b.region) &&
                     metric_equal(a.band_fraction, b.band_fraction) && a.duration == b.duration;
  return out;
}

}  // namespace socnav
