#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "revgame/simulator.hpp"
#include "revgame/text.hpp"

namespace revgame {

// Experiment configuration file: one "key=value" per line, '#' comments,
// unknown keys rejected, missing keys fall back to the defaults built into
// ExperimentConfig. Keys:
//   system, epochs, learning_rate, hidden_width, residual_blocks,
//   lambda_aux, d_t, th_a, th_r, bias_halfwidth, window,
//   stats_window_fraction, seed

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& msg)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + msg
                                    : "config: " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline ExperimentConfig parse_config(std::string_view content) {
  struct Raw {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Raw, std::less<>> raw;

  std::istringstream in{std::string(content)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto body = text::trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, "expected key=value");
    std::string key{text::trim(body.substr(0, eq))};
    std::string value{text::trim(body.substr(eq + 1))};
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (raw.count(key)) throw ConfigError(line_no, "duplicate key \"" + key + "\"");
    raw.emplace(std::move(key), Raw{std::move(value), line_no});
  }

  ExperimentConfig cfg;
  double th_a = cfg.quality.accept_threshold;
  double th_r = cfg.quality.revision_threshold;
  double bias_hw = cfg.quality.bias_halfwidth;
  std::map<std::string, int, std::less<>> line_of;

  auto take = [&](std::string_view key) -> const Raw* {
    auto it = raw.find(key);
    if (it == raw.end()) return nullptr;
    line_of[std::string(key)] = it->second.line;
    return &it->second;
  };
  auto fail = [](const Raw* r, const std::string& msg) -> ConfigError {
    return ConfigError(r->line, msg);
  };

  static const char* known[] = {"system",      "epochs",        "learning_rate",
                                "hidden_width", "residual_blocks", "lambda_aux",
                                "d_t",         "th_a",          "th_r",
                                "bias_halfwidth", "window",     "stats_window_fraction",
                                "seed"};
  for (const auto& [key, r] : raw) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(r.line, "unknown key \"" + key + "\"");
  }

  try {
    if (const Raw* r = take("system")) cfg.system = parse_reward_system(r->value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(raw.find("system")->second.line, e.what());
  }

  auto parse_field = [&](std::string_view key, auto parser, auto check, auto assign) {
    const Raw* r = take(key);
    if (!r) return;
    try {
      auto v = parser(r->value);
      check(v, r);
      assign(v);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(r->line, e.what());
    }
  };

  parse_field(
      "epochs", [](const std::string& s) { return text::parse_long(s, "epochs"); },
      [&](long v, const Raw* r) {
        if (v < 0) throw fail(r, "epochs must be nonnegative");
      },
      [&](long v) { cfg.epochs = v; });
  parse_field(
      "learning_rate",
      [](const std::string& s) { return text::parse_double(s, "learning_rate"); },
      [&](double v, const Raw* r) {
        if (!(v > 0.0) || !std::isfinite(v)) throw fail(r, "learning_rate must be positive");
      },
      [&](double v) { cfg.learning_rate = v; });
  parse_field(
      "hidden_width", [](const std::string& s) { return text::parse_int(s, "hidden_width"); },
      [&](int v, const Raw* r) {
        if (v < 1) throw fail(r, "hidden_width must be >= 1");
      },
      [&](int v) { cfg.hidden_width = v; });
  parse_field(
      "residual_blocks",
      [](const std::string& s) { return text::parse_int(s, "residual_blocks"); },
      [&](int v, const Raw* r) {
        if (v < 0) throw fail(r, "residual_blocks must be >= 0");
      },
      [&](int v) { cfg.residual_blocks = v; });
  parse_field(
      "lambda_aux", [](const std::string& s) { return text::parse_double(s, "lambda_aux"); },
      [&](double v, const Raw* r) {
        if (!std::isfinite(v) || v < 0.0) throw fail(r, "lambda_aux must be nonnegative");
      },
      [&](double v) { cfg.lambda_aux = v; });
  parse_field(
      "d_t", [](const std::string& s) { return text::parse_double(s, "d_t"); },
      [&](double v, const Raw* r) {
        if (!std::isfinite(v) || v < 0.0 || v >= 1.0)
          throw fail(r, "d_t must satisfy 0 <= d_t < 1");
      },
      [&](double v) { cfg.time_discount = v; });
  parse_field(
      "th_a", [](const std::string& s) { return text::parse_double(s, "th_a"); },
      [&](double v, const Raw* r) {
        if (!std::isfinite(v)) throw fail(r, "th_a must be finite");
      },
      [&](double v) { th_a = v; });
  parse_field(
      "th_r", [](const std::string& s) { return text::parse_double(s, "th_r"); },
      [&](double v, const Raw* r) {
        if (!std::isfinite(v)) throw fail(r, "th_r must be finite");
      },
      [&](double v) { th_r = v; });
  parse_field(
      "bias_halfwidth",
      [](const std::string& s) { return text::parse_double(s, "bias_halfwidth"); },
      [&](double v, const Raw* r) {
        if (!std::isfinite(v) || v < 0.0) throw fail(r, "bias_halfwidth must be nonnegative");
      },
      [&](double v) { bias_hw = v; });
  parse_field(
      "window", [](const std::string& s) { return text::parse_int(s, "window"); },
      [&](int v, const Raw* r) {
        if (v < 1) throw fail(r, "window must be >= 1");
      },
      [&](int v) { cfg.moving_average_window = v; });
  parse_field(
      "stats_window_fraction",
      [](const std::string& s) { return text::parse_double(s, "stats_window_fraction"); },
      [&](double v, const Raw* r) {
        if (!(v > 0.0) || v > 1.0) throw fail(r, "stats_window_fraction must be in (0, 1]");
      },
      [&](double v) { cfg.stats_window_fraction = v; });
  parse_field(
      "seed", [](const std::string& s) { return text::parse_u64(s, "seed"); },
      [&](std::uint64_t, const Raw*) {}, [&](std::uint64_t v) { cfg.seed = v; });

  auto later_line = [&](std::string_view a, std::string_view b) {
    int la = line_of.count(std::string(a)) ? line_of[std::string(a)] : 0;
    int lb = line_of.count(std::string(b)) ? line_of[std::string(b)] : 0;
    return std::max(la, lb);
  };

  if (!(th_a > th_r))
    throw ConfigError(later_line("th_a", "th_r"),
                      "th_a must exceed th_r (got th_a=" + text::format_double(th_a) +
                          ", th_r=" + text::format_double(th_r) + ")");
  cfg.quality = QualityModel(th_a, th_r, bias_hw);

  if (cfg.epochs > 0 && cfg.epochs < cfg.moving_average_window)
    throw ConfigError(later_line("epochs", "window"),
                      "epochs must be at least the moving-average window");

  cfg.validate();
  return cfg;
}

// Canonical rendering; parse_config(render_config(c)) reproduces c exactly.
inline std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "system=" << to_string(cfg.system) << '\n'
      << "epochs=" << cfg.epochs << '\n'
      << "learning_rate=" << text::format_double(cfg.learning_rate) << '\n'
      << "hidden_width=" << cfg.hidden_width << '\n'
      << "residual_blocks=" << cfg.residual_blocks << '\n'
      << "lambda_aux=" << text::format_double(cfg.lambda_aux) << '\n'
      << "d_t=" << text::format_double(cfg.time_discount) << '\n'
      << "th_a=" << text::format_double(cfg.quality.accept_threshold) << '\n'
      << "th_r=" << text::format_double(cfg.quality.revision_threshold) << '\n'
      << "bias_halfwidth=" << text::format_double(cfg.quality.bias_halfwidth) << '\n'
      << "window=" << cfg.moving_average_window << '\n'
      << "stats_window_fraction=" << text::format_double(cfg.stats_window_fraction) << '\n'
      << "seed=" << cfg.seed << '\n';
  return out.str();
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline void write_config_file(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path.string());
  out << render_config(cfg);
}

}  // namespace revgame
