#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "distributions.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "experiments.hpp"
#include "score_sample.hpp"
#include "version.hpp"

namespace meanmax {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

// ---------------------------------------------------------------------------
// Runs CSV: `score[,run_id]`, optional header, one run per line.

struct RunsFile {
  ScoreSample sample;
  std::vector<std::string> run_ids;  // empty when the file has no second column
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace detail

inline RunsFile read_runs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw RunsFileError(RunsErrc::missing_file, 0, "cannot open runs file " + path.string());
  }
  std::vector<double> scores;
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  bool saw_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    const auto score_cell = detail::trim(row.substr(0, comma));
    const bool first_row = !saw_row;
    saw_row = true;

    const auto value = detail::parse_number(score_cell);
    if (!value) {
      if (first_row) continue;  // header
      throw RunsFileError(RunsErrc::malformed_row, line_no,
                          path.string() + ":" + std::to_string(line_no) +
                              ": cannot parse score '" + std::string(score_cell) + "'");
    }
    if (!std::isfinite(*value)) {
      throw RunsFileError(RunsErrc::non_finite_value, line_no,
                          path.string() + ":" + std::to_string(line_no) +
                              ": score is not finite");
    }
    if (comma != std::string_view::npos) {
      const auto rest = row.substr(comma + 1);
      if (rest.find(',') != std::string_view::npos) {
        throw RunsFileError(RunsErrc::malformed_row, line_no,
                            path.string() + ":" + std::to_string(line_no) +
                                ": expected at most two columns");
      }
      if (ids.size() != scores.size()) {
        throw RunsFileError(RunsErrc::malformed_row, line_no,
                            path.string() + ":" + std::to_string(line_no) +
                                ": run_id column present on some rows only");
      }
      ids.emplace_back(detail::trim(rest));
    } else if (!ids.empty()) {
      throw RunsFileError(RunsErrc::malformed_row, line_no,
                          path.string() + ":" + std::to_string(line_no) + ": missing run_id");
    }
    scores.push_back(*value);
  }
  if (scores.empty()) {
    throw RunsFileError(RunsErrc::empty_data, 0, "runs file " + path.string() + " has no data rows");
  }
  return {ScoreSample(std::move(scores)), std::move(ids)};
}

inline ScoreSample read_runs(const std::filesystem::path& path) {
  return read_runs_file(path).sample;
}

/// Writes scores in ingestion order under a `score[,run_id]` header.
inline void write_runs(const ScoreSample& sample, const std::filesystem::path& path,
                       const std::vector<std::string>& run_ids = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto values = sample.ingestion_order();
  const bool with_ids = run_ids.size() == values.size() && !run_ids.empty();
  out << (with_ids ? "score,run_id\n" : "score\n");
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_double(values[i]);
    if (with_ids) out << ',' << run_ids[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Distribution JSON: {"mass": [...], "support": [...]}

inline json to_json(const DiscreteDistribution& dist) {
  json j;
  j["support"] = std::vector<double>(dist.support().begin(), dist.support().end());
  j["mass"] = std::vector<double>(dist.mass().begin(), dist.mass().end());
  return j;
}

inline DiscreteDistribution distribution_from_json(const json& j) {
  try {
    return DiscreteDistribution(j.at("support").get<std::vector<double>>(),
                                j.at("mass").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw InvalidInput(InputErrc::bad_distribution,
                       std::string("malformed distribution JSON: ") + e.what());
  }
}

namespace detail {

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace detail

inline DiscreteDistribution read_distribution(const std::filesystem::path& path) {
  return distribution_from_json(detail::parse_json_file(path));
}

inline void write_distribution(const DiscreteDistribution& dist,
                               const std::filesystem::path& path) {
  detail::write_text(path, to_json(dist).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Report envelope

/// Curves estimated from one runs file.
struct EstimateReport {
  std::string source;
  std::vector<ExpectedMaxCurve> curves;

  bool operator==(const EstimateReport&) const = default;
};

struct FailureScanReport {
  std::string model_a;
  std::string model_b;
  EstimatorKind estimator = EstimatorKind::meanmax;
  std::vector<Inversion> inversions;

  bool operator==(const FailureScanReport&) const = default;
};

struct KsBoundRow {
  std::size_t n = 0;
  double cdf_at_sample_max = 0.0;
  double lower_bound = 0.0;
  std::optional<double> measured;  // present when a ground truth was supplied

  bool operator==(const KsBoundRow&) const = default;
};

struct KsBoundReport {
  std::vector<KsBoundRow> rows;

  bool operator==(const KsBoundReport&) const = default;
};

using ReportPayload = std::variant<EstimateReport, ProbeReport, CoverageReport, CurveReport,
                                   FailureScanReport, KsBoundReport>;

struct ReportEnvelope {
  std::string schema_version = kSchemaVersion;
  std::string tool_version = kToolVersion;
  json config = json::object();
  ReportPayload payload;
  std::string timestamp;
};

enum class ReportFormat { json, csv };

inline ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw InvalidInput(InputErrc::unknown_name, "unknown format '" + std::string(name) + "'");
}

/// UTC ISO-8601 time; honours SOURCE_DATE_EPOCH for reproducible builds.
inline std::string current_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    if (auto parsed = detail::parse_number(epoch)) now = static_cast<std::time_t>(*parsed);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline json interval_fields(json j, const std::optional<Interval>& ci) {
  if (ci) {
    j["ci_lo"] = ci->lo;
    j["ci_hi"] = ci->hi;
  }
  return j;
}

inline std::optional<Interval> interval_from(const json& j) {
  if (!j.contains("ci_lo")) return std::nullopt;
  return Interval{j.at("ci_lo").get<double>(), j.at("ci_hi").get<double>()};
}

inline json curve_to_json(const ExpectedMaxCurve& curve) {
  json points = json::array();
  for (const auto& p : curve.points) {
    points.push_back(interval_fields({{"n", p.n}, {"estimate", p.estimate}}, p.ci));
  }
  return {{"estimator", std::string(to_string(curve.estimator))},
          {"sample_size", curve.sample_size},
          {"points", points}};
}

inline ExpectedMaxCurve curve_from_json(const json& j) {
  ExpectedMaxCurve curve;
  curve.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
  curve.sample_size = j.at("sample_size").get<std::size_t>();
  for (const auto& p : j.at("points")) {
    curve.points.push_back(
        {p.at("n").get<std::size_t>(), p.at("estimate").get<double>(), interval_from(p)});
  }
  return curve;
}

struct PayloadToJson {
  json operator()(const EstimateReport& r) const {
    json curves = json::array();
    for (const auto& c : r.curves) curves.push_back(curve_to_json(c));
    return {{"kind", "estimate"}, {"source", r.source}, {"curves", curves}};
  }

  json operator()(const ProbeReport& r) const {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"n", row.n},
                      {"underestimates", row.underestimates},
                      {"samples", row.samples},
                      {"proportion", row.proportion},
                      {"ci_lo", row.ci.lo},
                      {"ci_hi", row.ci.hi},
                      {"truth", row.truth}});
    }
    return {{"kind", "probe"},
            {"distribution_id", r.distribution_id},
            {"sample_size", r.sample_size},
            {"estimator", std::string(to_string(r.estimator))},
            {"seed", r.seed},
            {"stream", r.stream},
            {"rows", rows}};
  }

  json operator()(const CoverageReport& r) const {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"n", row.n},
                      {"hits", row.hits},
                      {"trials", row.trials},
                      {"ecp", row.ecp},
                      {"ci_lo", row.ci.lo},
                      {"ci_hi", row.ci.hi},
                      {"truth", row.truth}});
    }
    return {{"kind", "coverage"},
            {"distribution_id", r.distribution_id},
            {"sample_size", r.sample_size},
            {"resamples", r.resamples},
            {"nominal", r.nominal},
            {"estimator", std::string(to_string(r.estimator))},
            {"seed", r.seed},
            {"stream", r.stream},
            {"rows", rows}};
  }

  json operator()(const CurveReport& r) const {
    json models = json::array();
    for (const auto& m : r.models) {
      models.push_back({{"name", m.name},
                        {"averaged", curve_to_json(m.averaged)},
                        {"std_error", m.std_error},
                        {"truth", m.truth}});
    }
    return {{"kind", "curves"},
            {"sample_size", r.sample_size},
            {"samples", r.samples},
            {"estimator", std::string(to_string(r.estimator))},
            {"seed", r.seed},
            {"stream", r.stream},
            {"models", models}};
  }

  json operator()(const FailureScanReport& r) const {
    json rows = json::array();
    for (const auto& inv : r.inversions) {
      rows.push_back({{"n", inv.n},
                      {"true_leader", inv.true_leader},
                      {"estimated_leader", inv.estimated_leader}});
    }
    return {{"kind", "failure-scan"},
            {"model_a", r.model_a},
            {"model_b", r.model_b},
            {"estimator", std::string(to_string(r.estimator))},
            {"inversions", rows}};
  }

  json operator()(const KsBoundReport& r) const {
    json rows = json::array();
    for (const auto& row : r.rows) {
      json j{{"n", row.n},
             {"cdf_at_sample_max", row.cdf_at_sample_max},
             {"lower_bound", row.lower_bound}};
      if (row.measured) j["measured"] = *row.measured;
      rows.push_back(j);
    }
    return {{"kind", "ks-bound"}, {"rows", rows}};
  }
};

inline ReportPayload payload_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "estimate") {
    EstimateReport r;
    r.source = j.at("source").get<std::string>();
    for (const auto& c : j.at("curves")) r.curves.push_back(curve_from_json(c));
    return r;
  }
  if (kind == "probe") {
    ProbeReport r;
    r.distribution_id = j.at("distribution_id").get<std::string>();
    r.sample_size = j.at("sample_size").get<std::size_t>();
    r.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.at("stream").get<std::uint64_t>();
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("n").get<std::size_t>(), row.at("underestimates").get<std::size_t>(),
                        row.at("samples").get<std::size_t>(), row.at("proportion").get<double>(),
                        {row.at("ci_lo").get<double>(), row.at("ci_hi").get<double>()},
                        row.at("truth").get<double>()});
    }
    return r;
  }
  if (kind == "coverage") {
    CoverageReport r;
    r.distribution_id = j.at("distribution_id").get<std::string>();
    r.sample_size = j.at("sample_size").get<std::size_t>();
    r.resamples = j.at("resamples").get<std::size_t>();
    r.nominal = j.at("nominal").get<double>();
    r.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.at("stream").get<std::uint64_t>();
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("n").get<std::size_t>(), row.at("hits").get<std::size_t>(),
                        row.at("trials").get<std::size_t>(), row.at("ecp").get<double>(),
                        {row.at("ci_lo").get<double>(), row.at("ci_hi").get<double>()},
                        row.at("truth").get<double>()});
    }
    return r;
  }
  if (kind == "curves") {
    CurveReport r;
    r.sample_size = j.at("sample_size").get<std::size_t>();
    r.samples = j.at("samples").get<std::size_t>();
    r.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.at("stream").get<std::uint64_t>();
    for (const auto& m : j.at("models")) {
      r.models.push_back({m.at("name").get<std::string>(), curve_from_json(m.at("averaged")),
                          m.at("std_error").get<std::vector<double>>(),
                          m.at("truth").get<std::vector<double>>()});
    }
    return r;
  }
  if (kind == "failure-scan") {
    FailureScanReport r;
    r.model_a = j.at("model_a").get<std::string>();
    r.model_b = j.at("model_b").get<std::string>();
    r.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
    for (const auto& row : j.at("inversions")) {
      r.inversions.push_back({row.at("n").get<std::size_t>(),
                              row.at("true_leader").get<std::string>(),
                              row.at("estimated_leader").get<std::string>()});
    }
    return r;
  }
  if (kind == "ks-bound") {
    KsBoundReport r;
    for (const auto& row : j.at("rows")) {
      KsBoundRow out{row.at("n").get<std::size_t>(), row.at("cdf_at_sample_max").get<double>(),
                     row.at("lower_bound").get<double>(), std::nullopt};
      if (row.contains("measured")) out.measured = row.at("measured").get<double>();
      r.rows.push_back(out);
    }
    return r;
  }
  throw InvalidInput(InputErrc::unknown_name, "unknown report kind '" + kind + "'");
}

}  // namespace detail

inline json payload_to_json(const ReportPayload& payload) {
  return std::visit(detail::PayloadToJson{}, payload);
}

inline json to_json(const ReportEnvelope& envelope) {
  return {{"schema_version", envelope.schema_version},
          {"tool_version", envelope.tool_version},
          {"config", envelope.config},
          {"payload", payload_to_json(envelope.payload)},
          {"timestamp", envelope.timestamp}};
}

/// Canonical JSON text: sorted keys, shortest round-trip doubles, trailing newline.
inline std::string to_json_text(const ReportEnvelope& envelope) {
  return to_json(envelope).dump(2) + "\n";
}

inline ReportEnvelope envelope_from_json(const json& j) {
  ReportEnvelope env;
  try {
    env.schema_version = j.at("schema_version").get<std::string>();
    const auto major = env.schema_version.substr(0, env.schema_version.find('.'));
    const std::string ours(kSchemaVersion);
    if (major != ours.substr(0, ours.find('.'))) {
      throw IoError("unsupported report schema " + env.schema_version);
    }
    env.tool_version = j.at("tool_version").get<std::string>();
    env.config = j.at("config");
    env.payload = detail::payload_from_json(j.at("payload"));
    env.timestamp = j.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return env;
}

inline ReportEnvelope read_report(const std::filesystem::path& path) {
  return envelope_from_json(detail::parse_json_file(path));
}

namespace detail {

inline std::string ci_cells(const std::optional<Interval>& ci) {
  return ci ? format_double(ci->lo) + "," + format_double(ci->hi) : std::string(",");
}

struct PayloadToCsv {
  std::string operator()(const EstimateReport& r) const {
    std::string out = "estimator,n,estimate,ci_lo,ci_hi\n";
    for (const auto& c : r.curves) {
      for (const auto& p : c.points) {
        out += std::string(to_string(c.estimator)) + "," + std::to_string(p.n) + "," +
               format_double(p.estimate) + "," + ci_cells(p.ci) + "\n";
      }
    }
    return out;
  }

  std::string operator()(const ProbeReport& r) const {
    std::string out = "n,underestimates,samples,proportion,ci_lo,ci_hi,truth\n";
    for (const auto& row : r.rows) {
      out += std::to_string(row.n) + "," + std::to_string(row.underestimates) + "," +
             std::to_string(row.samples) + "," + format_double(row.proportion) + "," +
             ci_cells(row.ci) + "," + format_double(row.truth) + "\n";
    }
    return out;
  }

  std::string operator()(const CoverageReport& r) const {
    std::string out = "n,hits,trials,ecp,ci_lo,ci_hi,truth\n";
    for (const auto& row : r.rows) {
      out += std::to_string(row.n) + "," + std::to_string(row.hits) + "," +
             std::to_string(row.trials) + "," + format_double(row.ecp) + "," +
             ci_cells(row.ci) + "," + format_double(row.truth) + "\n";
    }
    return out;
  }

  std::string operator()(const CurveReport& r) const {
    std::string out = "model,n,estimate,std_error,truth\n";
    for (const auto& m : r.models) {
      for (std::size_t k = 0; k < m.averaged.points.size(); ++k) {
        out += m.name + "," + std::to_string(m.averaged.points[k].n) + "," +
               format_double(m.averaged.points[k].estimate) + "," +
               format_double(m.std_error[k]) + "," + format_double(m.truth[k]) + "\n";
      }
    }
    return out;
  }

  std::string operator()(const FailureScanReport& r) const {
    std::string out = "n,true_leader,estimated_leader\n";
    for (const auto& inv : r.inversions) {
      out += std::to_string(inv.n) + "," + inv.true_leader + "," + inv.estimated_leader + "\n";
    }
    return out;
  }

  std::string operator()(const KsBoundReport& r) const {
    std::string out = "n,cdf_at_sample_max,lower_bound,measured\n";
    for (const auto& row : r.rows) {
      out += std::to_string(row.n) + "," + format_double(row.cdf_at_sample_max) + "," +
             format_double(row.lower_bound) + "," +
             (row.measured ? format_double(*row.measured) : std::string()) + "\n";
    }
    return out;
  }
};

}  // namespace detail

/// Per-n rows flattened to CSV; column order fixed per payload kind.
inline std::string to_csv_text(const ReportPayload& payload) {
  return std::visit(detail::PayloadToCsv{}, payload);
}

/// Writes the envelope as JSON or its payload as CSV. Path "-" is stdout.
inline void write_report(const ReportEnvelope& envelope, const std::filesystem::path& path,
                         ReportFormat format) {
  detail::write_text(path, format == ReportFormat::json ? to_json_text(envelope)
                                                        : to_csv_text(envelope.payload));
}

}  // namespace meanmax
