#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "rcdvs/bench.hpp"
#include "rcdvs/error.hpp"

namespace rcdvs {

using nlohmann::json;

TableFormat parse_table_format(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "csv") return TableFormat::Csv;
  if (s == "json") return TableFormat::Json;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  throw Error(ErrorKind::Config, "unknown output format '" + name + "'");
}

std::string format_number(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

namespace {

const std::vector<std::string> kHeader = {"method", "tau",    "it",        "time_s", "acc",
                                          "%",      "theory", "completed", "capped"};

std::vector<std::string> cells(const ResultRow& r) {
  return {to_string(r.method.method),     std::to_string(r.method.tau),
          format_number(r.median_iterations), format_number(r.median_seconds),
          format_number(r.acc),           format_number(r.percent),
          format_number(r.theory_acc),    std::to_string(r.completed),
          std::to_string(r.capped)};
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

MethodSpec method_from(const json& j) {
  return {parse_method(j.at("method").get<std::string>()), j.at("tau").get<int>()};
}

std::string to_json(const ResultTable& t) {
  json j;
  j["title"] = t.title;
  j["rows"] = json::array();
  for (const auto& r : t.rows) {
    j["rows"].push_back({{"method", to_string(r.method.method)},
                         {"tau", r.method.tau},
                         {"median_iterations", opt(r.median_iterations)},
                         {"median_seconds", opt(r.median_seconds)},
                         {"acc", opt(r.acc)},
                         {"percent", opt(r.percent)},
                         {"theory_acc", opt(r.theory_acc)},
                         {"completed", r.completed},
                         {"capped", r.capped}});
  }
  j["repetitions"] = json::array();
  for (const auto& r : t.records) {
    j["repetitions"].push_back({{"repetition", r.repetition},
                                {"method", to_string(r.method.method)},
                                {"tau", r.method.tau},
                                {"iterations", r.iterations},
                                {"seconds", r.seconds},
                                {"capped", r.capped},
                                {"acc", opt(r.acc)}});
  }
  j["warnings"] = t.warnings;
  return j.dump(2) + "\n";
}

}  // namespace

std::string render_grid(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows, TableFormat format,
                        const std::string& title) {
  std::ostringstream out;
  if (format == TableFormat::Csv) {
    auto emit = [&](const std::vector<std::string>& line) {
      for (std::size_t c = 0; c < line.size(); ++c) {
        out << (c ? "," : "") << (line[c] == "-" ? "" : line[c]);
      }
      out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out.str();
  }
  if (format != TableFormat::Markdown) throw Error(ErrorKind::Config, "grid needs csv or markdown");
  std::vector<std::size_t> width(header.size(), 3);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = std::max(width[c], header[c].size());
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw Error(ErrorKind::Domain, "ragged table row");
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  if (!title.empty()) out << "**" << title << "**\n\n";
  auto emit = [&](const std::vector<std::string>& line) {
    out << '|';
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << ' ' << line[c] << std::string(width[c] - line[c].size(), ' ') << " |";
    }
    out << '\n';
  };
  emit(header);
  out << '|';
  for (std::size_t w : width) out << std::string(w + 2, '-') << '|';
  out << '\n';
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string emit_table(const ResultTable& table, TableFormat format) {
  if (format == TableFormat::Json) return to_json(table);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows) rows.push_back(cells(r));
  auto header = kHeader;
  if (format == TableFormat::Csv) header[5] = "percent";
  return render_grid(header, rows, format, table.title);
}

ResultTable table_from_json(const std::string& text) {
  ResultTable t;
  try {
    const json j = json::parse(text);
    t.title = j.value("title", "");
    for (const auto& r : j.at("rows")) {
      ResultRow row;
      row.method = method_from(r);
      row.median_iterations = get_opt(r, "median_iterations");
      row.median_seconds = get_opt(r, "median_seconds");
      row.acc = get_opt(r, "acc");
      row.percent = get_opt(r, "percent");
      row.theory_acc = get_opt(r, "theory_acc");
      row.completed = r.at("completed").get<int>();
      row.capped = r.at("capped").get<int>();
      t.rows.push_back(row);
    }
    if (j.contains("repetitions")) {
      for (const auto& r : j.at("repetitions")) {
        RepetitionRecord rec;
        rec.repetition = r.at("repetition").get<int>();
        rec.method = method_from(r);
        rec.iterations = r.at("iterations").get<std::int64_t>();
        rec.seconds = r.at("seconds").get<double>();
        rec.capped = r.at("capped").get<bool>();
        rec.acc = get_opt(r, "acc");
        t.records.push_back(rec);
      }
    }
    if (j.contains("warnings")) t.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("result table: ") + e.what());
  }
  return t;
}

}  // namespace rcdvs
