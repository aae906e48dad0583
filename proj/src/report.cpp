#include "specbench/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "specbench/hash.hpp"
#include "specbench/version.hpp"

namespace specbench {
namespace {

std::string provenance_comment(std::uint64_t config_hash) {
  return std::string("# ") + kToolName + " " + kToolVersion + " config " + hash_hex(config_hash);
}

// Shortest round-trip decimal form; bit-stable across runs of the same build.
std::string fmt(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

// Fixed two-decimal form for SVG pixel coordinates.
std::string px(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return std::string(buf);
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string xml_escape(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Fixed palette; wraps around when a plot holds more series than entries.
const char* series_color(std::size_t index) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[index % (sizeof(colors) / sizeof(colors[0]))];
}

// Splits a curve into runs of consecutive points with no skipped bin between
// them; the renderer breaks the polyline at every boundary.
std::vector<std::pair<int, int>> curve_segments(const AccuracyCurve& curve) {
  std::vector<std::pair<int, int>> segments;
  const int count = static_cast<int>(curve.bin_centers.size());
  int begin = 0;
  for (int i = 0; i + 1 < count; ++i) {
    const int lo = curve.bin_indices[static_cast<std::size_t>(i)];
    const int hi = curve.bin_indices[static_cast<std::size_t>(i) + 1];
    const bool gap = std::any_of(curve.skipped_bins.begin(), curve.skipped_bins.end(),
                                 [&](int bin) { return bin > lo && bin < hi; });
    if (gap) {
      segments.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  segments.emplace_back(begin, count);
  return segments;
}

}  // namespace

std::string curves_csv(const std::vector<AccuracyCurve>& curves, std::uint64_t config_hash) {
  std::ostringstream out;
  out << provenance_comment(config_hash) << "\n";
  out << "dataset,model,bin_center,mean_acc,std_acc\n";
  for (const AccuracyCurve& curve : curves) {
    for (std::size_t i = 0; i < curve.bin_centers.size(); ++i) {
      out << csv_field(curve.dataset) << ',' << csv_field(curve.model) << ','
          << fmt(curve.bin_centers[i]) << ',' << fmt(curve.mean_acc[i]) << ','
          << fmt(curve.std_acc[i]) << "\n";
    }
  }
  return out.str();
}

std::string auac_csv(const std::vector<AUACScore>& scores, std::uint64_t config_hash) {
  std::ostringstream out;
  out << provenance_comment(config_hash) << "\n";
  out << "dataset,model,range,normalized_auac\n";
  for (const AUACScore& score : scores) {
    out << csv_field(score.dataset) << ',' << csv_field(score.model) << ','
        << range_tag_name(score.range) << ',' << fmt(score.value) << "\n";
  }
  return out.str();
}

std::string ranking_csv(const RankingTable& table, std::uint64_t config_hash) {
  std::ostringstream out;
  out << provenance_comment(config_hash) << "\n";
  out << "# range " << range_tag_name(table.range) << "\n";
  out << "model,avg_rank,std_rank";
  for (const std::string& ds : table.datasets) out << ',' << csv_field("rank_" + ds);
  out << "\n";
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    out << csv_field(table.models[i]) << ',' << fmt(table.avg_rank[i]) << ','
        << fmt(table.std_rank[i]);
    for (Eigen::Index j = 0; j < table.ranks.cols(); ++j) {
      out << ',' << fmt(table.ranks(static_cast<Eigen::Index>(i), j));
    }
    out << "\n";
  }
  return out.str();
}

std::string render_curves_svg(const std::vector<AccuracyCurve>& curves, std::uint64_t config_hash) {
  if (curves.empty()) throw std::invalid_argument("render_curves_svg: no curves");

  const double panel_w = 640.0, panel_h = 280.0;
  const double margin_left = 56.0, margin_right = 16.0, margin_top = 34.0, margin_bottom = 40.0;
  const double plot_w = panel_w - margin_left - margin_right;
  const double plot_h = panel_h - margin_top - margin_bottom;
  const double total_h = panel_h * static_cast<double>(curves.size());

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(panel_w) << "\" height=\""
      << px(total_h) << "\" viewBox=\"0 0 " << px(panel_w) << " " << px(total_h) << "\">\n";
  out << "<!-- " << kToolName << " " << kToolVersion << " config " << hash_hex(config_hash)
      << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const AccuracyCurve& curve = curves[c];
    const double top = panel_h * static_cast<double>(c);
    const auto sx = [&](double freq) { return margin_left + freq / 2.0 * plot_w; };
    const auto sy = [&](double acc) { return top + margin_top + (1.0 - acc) * plot_h; };
    const char* color = series_color(c);

    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << px(margin_left) << "\" y=\"" << px(top + 20.0)
        << "\" font-size=\"14\">" << xml_escape(curve.dataset + " / " + curve.model) << "</text>\n";
    out << "<rect x=\"" << px(margin_left) << "\" y=\"" << px(top + margin_top) << "\" width=\""
        << px(plot_w) << "\" height=\"" << px(plot_h)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double freq = 0.5 * t;
      out << "<line x1=\"" << px(sx(freq)) << "\" y1=\"" << px(top + margin_top + plot_h)
          << "\" x2=\"" << px(sx(freq)) << "\" y2=\"" << px(top + margin_top + plot_h + 4.0)
          << "\" stroke=\"#333333\"/>\n";
      out << "<text x=\"" << px(sx(freq)) << "\" y=\"" << px(top + margin_top + plot_h + 18.0)
          << "\" text-anchor=\"middle\">" << fmt(freq) << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
      const double acc = 0.25 * t;
      out << "<line x1=\"" << px(margin_left - 4.0) << "\" y1=\"" << px(sy(acc)) << "\" x2=\""
          << px(margin_left) << "\" y2=\"" << px(sy(acc)) << "\" stroke=\"#333333\"/>\n";
      out << "<text x=\"" << px(margin_left - 8.0) << "\" y=\"" << px(sy(acc) + 4.0)
          << "\" text-anchor=\"end\">" << fmt(acc) << "</text>\n";
    }
    out << "<text x=\"" << px(margin_left + plot_w / 2.0) << "\" y=\""
        << px(top + margin_top + plot_h + 34.0)
        << "\" text-anchor=\"middle\">frequency</text>\n";

    for (const auto& [begin, end] : curve_segments(curve)) {
      if (end - begin >= 2) {
        // +/-1 std band: upper boundary forward, lower boundary back.
        out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (int i = begin; i < end; ++i) {
          const auto idx = static_cast<std::size_t>(i);
          const double acc = std::min(1.0, curve.mean_acc[idx] + curve.std_acc[idx]);
          out << px(sx(curve.bin_centers[idx])) << "," << px(sy(acc)) << " ";
        }
        for (int i = end - 1; i >= begin; --i) {
          const auto idx = static_cast<std::size_t>(i);
          const double acc = std::max(0.0, curve.mean_acc[idx] - curve.std_acc[idx]);
          out << px(sx(curve.bin_centers[idx])) << "," << px(sy(acc));
          if (i > begin) out << " ";
        }
        out << "\"/>\n";
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (int i = begin; i < end; ++i) {
          const auto idx = static_cast<std::size_t>(i);
          out << px(sx(curve.bin_centers[idx])) << "," << px(sy(curve.mean_acc[idx]));
          if (i + 1 < end) out << " ";
        }
        out << "\"/>\n";
      }
      for (int i = begin; i < end; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out << "<circle cx=\"" << px(sx(curve.bin_centers[idx])) << "\" cy=\""
            << px(sy(curve.mean_acc[idx])) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_energy_svg(const EnergyComparison& comparison, std::uint64_t config_hash) {
  const auto bins = static_cast<int>(comparison.bin_centers.size());
  if (bins == 0) throw std::invalid_argument("render_energy_svg: empty comparison");
  if (comparison.input_energy.size() != bins || comparison.target_energy.size() != bins ||
      comparison.output_energy.size() != bins) {
    throw std::invalid_argument("render_energy_svg: energy rows disagree with bin count");
  }

  const double width = 720.0, height = 320.0;
  const double margin_left = 56.0, margin_right = 16.0, margin_top = 46.0, margin_bottom = 40.0;
  const double plot_w = width - margin_left - margin_right;
  const double plot_h = height - margin_top - margin_bottom;
  const double group_w = plot_w / bins;
  const double bar_w = group_w / 4.0;

  const struct {
    const char* label;
    const Eigen::VectorXd* values;
    const char* color;
  } series[3] = {{"input", &comparison.input_energy, "#1f77b4"},
                 {"target", &comparison.target_energy, "#2ca02c"},
                 {"output", &comparison.output_energy, "#d62728"}};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
      << px(height) << "\" viewBox=\"0 0 " << px(width) << " " << px(height) << "\">\n";
  out << "<!-- " << kToolName << " " << kToolVersion << " config " << hash_hex(config_hash)
      << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << px(margin_left) << "\" y=\"18\" font-size=\"14\">"
      << xml_escape(comparison.dataset + " / " + comparison.model + " / " + comparison.direction)
      << "</text>\n";
  out << "<rect x=\"" << px(margin_left) << "\" y=\"" << px(margin_top) << "\" width=\""
      << px(plot_w) << "\" height=\"" << px(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  for (int s = 0; s < 3; ++s) {
    for (int b = 0; b < bins; ++b) {
      const double value = std::max(0.0, (*series[s].values)[b]);
      const double bar_h = value * plot_h;
      const double x = margin_left + group_w * b + bar_w * (0.5 + s);
      out << "<rect x=\"" << px(x) << "\" y=\"" << px(margin_top + plot_h - bar_h) << "\" width=\""
          << px(bar_w) << "\" height=\"" << px(bar_h) << "\" fill=\"" << series[s].color
          << "\"/>\n";
    }
    const double lx = margin_left + 90.0 * s;
    out << "<rect x=\"" << px(lx) << "\" y=\"26\" width=\"10\" height=\"10\" fill=\""
        << series[s].color << "\"/>\n";
    out << "<text x=\"" << px(lx + 14.0) << "\" y=\"35\">" << series[s].label << "</text>\n";
  }

  for (int b = 0; b < bins; ++b) {
    if (bins > 10 && b % 2 == 1) continue;  // thin the labels when crowded
    const double x = margin_left + group_w * (b + 0.5);
    out << "<text x=\"" << px(x) << "\" y=\"" << px(margin_top + plot_h + 16.0)
        << "\" text-anchor=\"middle\">" << fmt(comparison.bin_centers[static_cast<std::size_t>(b)])
        << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double frac = 0.25 * t;
    const double y = margin_top + plot_h * (1.0 - frac);
    out << "<line x1=\"" << px(margin_left - 4.0) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(margin_left) << "\" y2=\"" << px(y) << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << px(margin_left - 8.0) << "\" y=\"" << px(y + 4.0)
        << "\" text-anchor=\"end\">" << fmt(frac) << "</text>\n";
  }
  out << "<text x=\"" << px(margin_left + plot_w / 2.0) << "\" y=\""
      << px(margin_top + plot_h + 32.0) << "\" text-anchor=\"middle\">frequency bin</text>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace specbench
