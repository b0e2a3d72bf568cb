#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "revgame/config.hpp"
#include "revgame/simulator.hpp"
#include "revgame/text.hpp"

namespace revgame {

// Files inside a run directory.
inline constexpr std::string_view kConfigFileName = "config.txt";
inline constexpr std::string_view kEpochsFileName = "epochs.csv";
inline constexpr std::string_view kSummaryFileName = "summary.txt";
inline constexpr std::string_view kFrequencyFileName = "frequency.csv";
inline constexpr std::string_view kMovingAverageFileName = "moving_average.csv";
inline constexpr std::string_view kRewardPlotFileName = "reward_curve.svg";
inline constexpr std::string_view kDecisionPlotFileName = "decision_grid.svg";
inline constexpr std::string_view kAgent1CheckpointName = "agent1.ckpt";
inline constexpr std::string_view kAgent2CheckpointName = "agent2.ckpt";

inline constexpr std::string_view kEpochCsvHeader =
    "epoch,S_p,b1,b2,shat1,shat2,true_decision,d1,d2,reward,loss1,loss2";

// Streams EpochRecords to CSV; usable directly as the run_experiment sink.
class EpochCsvWriter {
 public:
  explicit EpochCsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write epoch CSV: " + path.string());
    out_ << kEpochCsvHeader << '\n';
  }

  void operator()(const EpochRecord& r) {
    out_ << r.epoch << ',' << text::format_double(r.true_quality) << ','
         << text::format_double(r.bias1) << ',' << text::format_double(r.bias2) << ','
         << text::format_double(r.est1) << ',' << text::format_double(r.est2) << ','
         << token(r.true_decision) << ',' << token(r.decision1) << ',' << token(r.decision2)
         << ',' << text::format_double(r.reward) << ',' << text::format_double(r.loss1) << ','
         << text::format_double(r.loss2) << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("epoch CSV write failed");
  }

 private:
  std::ofstream out_;
};

inline std::vector<EpochRecord> read_epochs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open epoch CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kEpochCsvHeader)
    throw std::invalid_argument("epoch CSV has an unexpected header: " + path.string());

  std::vector<EpochRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto f = text::split(text::trim(line), ',');
    if (f.size() != 12)
      throw std::invalid_argument("epoch CSV line " + std::to_string(line_no) +
                                  ": expected 12 fields");
    EpochRecord r;
    r.epoch = text::parse_long(f[0], "epoch");
    r.true_quality = text::parse_double(f[1], "S_p");
    r.bias1 = text::parse_double(f[2], "b1");
    r.bias2 = text::parse_double(f[3], "b2");
    r.est1 = text::parse_double(f[4], "shat1");
    r.est2 = text::parse_double(f[5], "shat2");
    r.true_decision = parse_decision(f[6]);
    r.decision1 = parse_decision(f[7]);
    r.decision2 = parse_decision(f[8]);
    r.reward = text::parse_double(f[9], "reward");
    r.loss1 = text::parse_double(f[10], "loss1");
    r.loss2 = text::parse_double(f[11], "loss2");
    out.push_back(r);
  }
  return out;
}

namespace detail {
inline std::string freq_key(int i, int j) {
  return "freq_" + std::string(token(decision_from_ordinal(i))) + "_" +
         std::string(token(decision_from_ordinal(j)));
}
}  // namespace detail

inline void write_summary_kv(std::ostream& out, const RunSummary& s) {
  out << "total_epochs=" << s.total_epochs << '\n'
      << "window=" << s.window << '\n'
      << "stats_window_fraction=" << text::format_double(s.stats_window_fraction) << '\n'
      << "stats_begin=" << s.stats_begin << '\n'
      << "stats_count=" << s.stats_count << '\n'
      << "reward_mean=" << text::fixed(s.reward_mean, 9) << '\n'
      << "reward_stddev=" << text::fixed(s.reward_stddev, 9) << '\n'
      << "delta_aa=" << text::fixed(s.delta_aa, 4) << '\n'
      << "delta_revrev=" << text::fixed(s.delta_revrev, 4) << '\n'
      << "delta_rr=" << text::fixed(s.delta_rr, 4) << '\n'
      << "delta_max=" << text::fixed(s.delta_max, 4) << '\n';
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out << detail::freq_key(i, j) << '=' << text::fixed(s.pair_frequency[i][j], 9) << '\n';
}

inline std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto body = text::trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("malformed key-value line in " + path.string());
    out.emplace(text::trim(body.substr(0, eq)), text::trim(body.substr(eq + 1)));
  }
  return out;
}

inline void write_frequency_csv(std::ostream& out,
                                const std::array<std::array<double, 3>, 3>& freq) {
  out << "pair";
  for (Decision d : all_decisions()) out << ',' << to_string(d);
  out << '\n';
  for (int i = 0; i < 3; ++i) {
    out << to_string(decision_from_ordinal(i));
    for (int j = 0; j < 3; ++j) out << ',' << text::fixed(freq[i][j], 9);
    out << '\n';
  }
}

inline std::array<std::array<double, 3>, 3> read_frequency_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frequency CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("frequency CSV is empty: " + path.string());
  std::array<std::array<double, 3>, 3> freq{};
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line))
      throw std::invalid_argument("frequency CSV truncated: " + path.string());
    auto f = text::split(text::trim(line), ',');
    if (f.size() != 4) throw std::invalid_argument("frequency CSV row must have 4 fields");
    if (parse_decision(f[0]) != decision_from_ordinal(i))
      throw std::invalid_argument("frequency CSV rows out of order");
    for (int j = 0; j < 3; ++j) freq[i][j] = text::parse_double(f[j + 1], "frequency");
  }
  return freq;
}

inline void write_moving_average_csv(std::ostream& out, const RunSummary& s) {
  out << "epoch,reward_ma\n";
  for (std::size_t k = 0; k < s.moving_average.size(); ++k)
    out << (static_cast<long>(k) + s.window - 1) << ','
        << text::format_double(s.moving_average[k]) << '\n';
}

inline std::vector<std::pair<long, double>> read_moving_average_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open moving-average CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "epoch,reward_ma")
    throw std::invalid_argument("moving-average CSV has an unexpected header");
  std::vector<std::pair<long, double>> out;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto f = text::split(text::trim(line), ',');
    if (f.size() != 2) throw std::invalid_argument("moving-average CSV row must have 2 fields");
    out.emplace_back(text::parse_long(f[0], "epoch"), text::parse_double(f[1], "reward_ma"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plots: self-contained SVG, byte-stable for identical summaries.
// ---------------------------------------------------------------------------

inline std::string svg_reward_curve(const RunSummary& s) {
  if (s.moving_average.empty())
    throw std::invalid_argument("refusing to plot: moving-average series is empty");

  const double width = 960, height = 480;
  const double left = 70, right = 935, top = 45, bottom = 430;
  const std::size_t n = s.moving_average.size();
  const long first_epoch = s.window - 1;
  const long last_epoch = first_epoch + static_cast<long>(n) - 1;
  const double span = std::max(1L, last_epoch - first_epoch);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">moving-average reward (window "
      << s.window << ")</text>\n";

  // Axes and ticks. Reward axis is fixed to [0, 1].
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    const double y = bottom - v * (bottom - top);
    out << "<line x1=\"" << (left - 4) << "\" y1=\"" << text::fixed(y, 2) << "\" x2=\"" << left
        << "\" y2=\"" << text::fixed(y, 2) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (left - 8) << "\" y=\"" << text::fixed(y + 4, 2)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << text::fixed(v, 1) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const long e = first_epoch + static_cast<long>(i * span / 4.0);
    const double x = left + (right - left) * (i / 4.0);
    out << "<line x1=\"" << text::fixed(x, 2) << "\" y1=\"" << bottom << "\" x2=\""
        << text::fixed(x, 2) << "\" y2=\"" << (bottom + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << text::fixed(x, 2) << "\" y=\"" << (bottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << e
        << "</text>\n";
  }
  out << "<text x=\"" << ((left + right) / 2) << "\" y=\"" << (bottom + 38)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">epoch"
         "</text>\n";

  const std::size_t stride = std::max<std::size_t>(1, n / 1800);
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  for (std::size_t k = 0; k < n; k += stride) {
    const long e = first_epoch + static_cast<long>(k);
    const double x = left + (right - left) * (static_cast<double>(e - first_epoch) / span);
    const double v = std::clamp(s.moving_average[k], 0.0, 1.0);
    const double y = bottom - v * (bottom - top);
    out << text::fixed(x, 2) << ',' << text::fixed(y, 2) << ' ';
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

inline std::string svg_decision_grid(const std::array<std::array<double, 3>, 3>& freq) {
  const double cell = 120, label = 90, pad = 40;
  const double width = label + 3 * cell + 20, height = pad + label / 2 + 3 * cell + 20;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (label + 1.5 * cell) << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">decision-pair frequency "
         "(reviewer 1 rows, reviewer 2 columns)</text>\n";

  for (int j = 0; j < 3; ++j)
    out << "<text x=\"" << (label + j * cell + cell / 2) << "\" y=\"" << (pad + 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << to_string(decision_from_ordinal(j)) << "</text>\n";

  const double grid_top = pad + 20;
  for (int i = 0; i < 3; ++i) {
    out << "<text x=\"" << (label - 8) << "\" y=\"" << (grid_top + i * cell + cell / 2 + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << to_string(decision_from_ordinal(i)) << "</text>\n";
    for (int j = 0; j < 3; ++j) {
      const double f = std::clamp(freq[i][j], 0.0, 1.0);
      const int r = static_cast<int>(255 - f * (255 - 31));
      const int g = static_cast<int>(255 - f * (255 - 119));
      const int b = static_cast<int>(255 - f * (255 - 180));
      const double x = label + j * cell, y = grid_top + i * cell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"rgb(" << r << ',' << g << ',' << b
          << ")\" stroke=\"black\"/>\n";
      out << "<text x=\"" << (x + cell / 2) << "\" y=\"" << (y + cell / 2 + 5)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
          << text::fixed(100.0 * freq[i][j], 2) << "%</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

// Writes the summary key-value file, the frequency and moving-average CSV
// blocks, and the two plots. Byte-stable for identical summaries.
inline void emit_report(const RunSummary& summary, const std::filesystem::path& run_dir) {
  if (summary.moving_average.empty())
    throw std::invalid_argument("refusing to emit report: moving-average series is empty");
  namespace fs = std::filesystem;
  fs::create_directories(run_dir);

  auto write_file = [&](std::string_view name, const std::string& content) {
    std::ofstream out(run_dir / name);
    if (!out) throw std::runtime_error("cannot write " + (run_dir / name).string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + (run_dir / name).string());
  };

  {
    std::ostringstream s;
    write_summary_kv(s, summary);
    write_file(kSummaryFileName, s.str());
  }
  {
    std::ostringstream s;
    write_frequency_csv(s, summary.pair_frequency);
    write_file(kFrequencyFileName, s.str());
  }
  {
    std::ostringstream s;
    write_moving_average_csv(s, summary);
    write_file(kMovingAverageFileName, s.str());
  }
  write_file(kRewardPlotFileName, svg_reward_curve(summary));
  write_file(kDecisionPlotFileName, svg_decision_grid(summary.pair_frequency));
}

// ---------------------------------------------------------------------------
// Side-by-side comparison of two completed runs (positionally: first slot is
// reported as "current", second as "proposed").
// ---------------------------------------------------------------------------

struct RunComparison {
  ExperimentConfig config_current;
  ExperimentConfig config_proposed;
  RunSummary current;
  RunSummary proposed;

  std::string delta_max_verdict() const {
    if (current.delta_max > proposed.delta_max) return "proposed_lower";
    if (current.delta_max < proposed.delta_max) return "current_lower";
    return "equal";
  }
  std::string sigma_verdict() const {
    if (current.reward_stddev > proposed.reward_stddev) return "proposed_lower";
    if (current.reward_stddev < proposed.reward_stddev) return "current_lower";
    return "equal";
  }
};

// Settings must match; the window statistics are recomputed from the stored
// record streams rather than trusted from summary files.
inline RunComparison compare_runs(const std::filesystem::path& current_dir,
                                  const std::filesystem::path& proposed_dir) {
  RunComparison cmp;
  cmp.config_current = load_config_file(current_dir / kConfigFileName);
  cmp.config_proposed = load_config_file(proposed_dir / kConfigFileName);

  const auto& a = cmp.config_current;
  const auto& b = cmp.config_proposed;
  if (a.epochs != b.epochs || a.moving_average_window != b.moving_average_window ||
      a.stats_window_fraction != b.stats_window_fraction)
    throw std::runtime_error(
        "comparison refused: runs differ in epochs/window/stats_window_fraction");

  auto records_a = read_epochs_csv(current_dir / kEpochsFileName);
  auto records_b = read_epochs_csv(proposed_dir / kEpochsFileName);
  cmp.current = summarize_full(a, records_a);
  cmp.proposed = summarize_full(b, records_b);
  return cmp;
}

inline void write_comparison(std::ostream& out, const RunComparison& cmp) {
  auto row = [&](const char* name, double c, double p) {
    out << name << '\t' << text::fixed(c, 4) << '\t' << text::fixed(p, 4) << '\n';
  };
  out << "== diagonal deviation from 1/3 (fraction) ==\n";
  out << "pair\tcurrent\tproposed\n";
  row("(A,A)", cmp.current.delta_aa, cmp.proposed.delta_aa);
  row("(Rev,Rev)", cmp.current.delta_revrev, cmp.proposed.delta_revrev);
  row("(Rej,Rej)", cmp.current.delta_rr, cmp.proposed.delta_rr);
  row("delta_max", cmp.current.delta_max, cmp.proposed.delta_max);
  out << "verdict: " << cmp.delta_max_verdict() << '\n';

  out << "== reward stability over the stats window ==\n";
  out << "sigma\t" << text::fixed(cmp.current.reward_stddev, 9) << '\t'
      << text::fixed(cmp.proposed.reward_stddev, 9) << '\n';
  out << "verdict: " << cmp.sigma_verdict() << '\n';

  out << "== key-value ==\n";
  out << "delta_aa_current=" << text::fixed(cmp.current.delta_aa, 4) << '\n';
  out << "delta_revrev_current=" << text::fixed(cmp.current.delta_revrev, 4) << '\n';
  out << "delta_rr_current=" << text::fixed(cmp.current.delta_rr, 4) << '\n';
  out << "delta_max_current=" << text::fixed(cmp.current.delta_max, 4) << '\n';
  out << "delta_aa_proposed=" << text::fixed(cmp.proposed.delta_aa, 4) << '\n';
  out << "delta_revrev_proposed=" << text::fixed(cmp.proposed.delta_revrev, 4) << '\n';
  out << "delta_rr_proposed=" << text::fixed(cmp.proposed.delta_rr, 4) << '\n';
  out << "delta_max_proposed=" << text::fixed(cmp.proposed.delta_max, 4) << '\n';
  out << "delta_max_verdict=" << cmp.delta_max_verdict() << '\n';
  out << "sigma_current=" << text::fixed(cmp.current.reward_stddev, 9) << '\n';
  out << "sigma_proposed=" << text::fixed(cmp.proposed.reward_stddev, 9) << '\n';
  out << "sigma_verdict=" << cmp.sigma_verdict() << '\n';
}

}  // namespace revgame
