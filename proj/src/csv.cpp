#include "bxn/csv.hpp"

#include <array>
#include <charconv>
#include <map>
#include <stdexcept>

#include "bxn/errors.hpp"

namespace bxn {

std::string format_number(double v) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc{}) throw ContractError("format_number: to_chars failed");
  return std::string(buf.data(), res.ptr);
}

std::string csv_field(const std::string& s) {
  const bool needs_quote = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header) : width_(header.size()) {
  if (width_ == 0) throw ContractError("CsvBuilder: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ += ',';
    out_ += csv_field(header[i]);
  }
  out_ += "\r\n";
}

void CsvBuilder::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw ContractError("CsvBuilder: row arity " + std::to_string(fields.size()) +
                        " != header arity " + std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ += ',';
    out_ += csv_field(fields[i]);
  }
  out_ += "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_open = false;  // some bytes consumed since last row break
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_open = true;
        ++i;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_open = true;
        ++i;
        break;
      case '\r':
      case '\n':
        if (row_open || !field.empty()) {
          row.push_back(std::move(field));
          field.clear();
          rows.push_back(std::move(row));
          row.clear();
          row_open = false;
        }
        if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
        ++i;
        break;
      default:
        field += c;
        row_open = true;
        ++i;
        break;
    }
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field at row " +
                                std::to_string(rows.size() + 1));
  if (row_open || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  if (!rows.empty()) {
    const std::size_t width = rows.front().size();
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (rows[r].size() != width)
        throw ConfigError("csv: row " + std::to_string(r + 1) + " has " +
                          std::to_string(rows[r].size()) + " fields, header has " +
                          std::to_string(width));
  }
  return rows;
}

std::string oc_report_csv(const OCReport& report) {
  CsvBuilder b({"scenario", "model", "rule", "subtrial", "metric", "estimate", "mc_se",
                "n_reps", "mean_rhat_max"});
  for (const OCRow& r : report.rows)
    b.row({r.scenario, r.model, r.rule, std::to_string(r.subtrial), r.metric,
           format_number(r.estimate), format_number(r.mc_se), std::to_string(r.n_reps),
           format_number(r.mean_rhat_max)});
  return b.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  CsvBuilder b({"scenario", "metric", "model", "mean_estimate", "se", "rank",
                "within_2se_of_best"});
  for (const ComparisonRow& cr : rows)
    for (const ModelRank& mr : cr.entries)
      b.row({cr.scenario, cr.metric, mr.model, format_number(mr.mean_estimate),
             format_number(mr.se), std::to_string(mr.rank),
             mr.within_2se_of_best ? "1" : "0"});
  return b.str();
}

namespace {

int parse_int_field(const std::string& s, const std::string& where) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_double_field(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + s + "'");
  }
}

int parse_arm_field(const std::string& s, const std::string& where) {
  if (s == "control") return kControl;
  if (s == "treatment") return kTreatment;
  throw ConfigError(where + ": arm must be control or treatment, got '" + s + "'");
}

void require_header(const std::vector<std::string>& got,
                    const std::vector<std::string>& want, const std::string& table) {
  if (got != want) {
    std::string msg = table + ": header must be";
    for (const auto& w : want) msg += " " + w;
    throw ConfigError(msg);
  }
}

}  // namespace

TrialData parse_trial_csv(const std::string& counts_text, const std::string& efficacy_text) {
  const auto counts = parse_csv(counts_text);
  if (counts.empty()) throw ConfigError("counts csv: empty document");
  require_header(counts.front(), {"subtrial", "arm", "n", "tox_count"}, "counts csv");

  std::map<std::pair<int, int>, ArmData> cells;  // (subtrial, arm) -> data
  int K = 0;
  for (std::size_t r = 1; r < counts.size(); ++r) {
    const auto& row = counts[r];
    const std::string where = "counts csv row " + std::to_string(r + 1);
    const int k = parse_int_field(row[0], where + ", column subtrial");
    if (k < 1) throw ConfigError(where + ", column subtrial: must be >= 1");
    const int arm = parse_arm_field(row[1], where + ", column arm");
    ArmData cell;
    cell.n = parse_int_field(row[2], where + ", column n");
    cell.tox_count = parse_int_field(row[3], where + ", column tox_count");
    if (!cells.emplace(std::make_pair(k, arm), cell).second)
      throw ConfigError(where + ": duplicate (subtrial, arm) cell");
    K = std::max(K, k);
  }
  if (K == 0) throw ConfigError("counts csv: no data rows");
  for (int k = 1; k <= K; ++k)
    for (int arm : {kControl, kTreatment})
      if (cells.find({k, arm}) == cells.end())
        throw ConfigError("counts csv: missing " +
                          std::string(arm == kControl ? "control" : "treatment") +
                          " row for subtrial " + std::to_string(k));

  const auto eff = parse_csv(efficacy_text);
  if (eff.empty()) throw ConfigError("efficacy csv: empty document");
  require_header(eff.front(), {"subtrial", "arm", "value"}, "efficacy csv");
  for (std::size_t r = 1; r < eff.size(); ++r) {
    const auto& row = eff[r];
    const std::string where = "efficacy csv row " + std::to_string(r + 1);
    const int k = parse_int_field(row[0], where + ", column subtrial");
    const int arm = parse_arm_field(row[1], where + ", column arm");
    auto it = cells.find({k, arm});
    if (it == cells.end())
      throw ConfigError(where + ", column subtrial: no such (subtrial, arm) cell in counts");
    it->second.eff.push_back(parse_double_field(row[2], where + ", column value"));
  }

  TrialData data;
  data.K = K;
  for (int arm : {kControl, kTreatment}) {
    data.arms[arm].resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
      ArmData& cell = cells.at({k, arm});
      if (!cell.eff.empty() && static_cast<int>(cell.eff.size()) != cell.n)
        throw ConfigError("efficacy csv: subtrial " + std::to_string(k) + " " +
                          (arm == kControl ? "control" : "treatment") + " has " +
                          std::to_string(cell.eff.size()) + " values, counts say n = " +
                          std::to_string(cell.n));
      data.arms[arm][static_cast<std::size_t>(k - 1)] = std::move(cell);
    }
  }
  data.validate();
  return data;
}

std::string trial_counts_csv(const TrialData& data) {
  CsvBuilder b({"subtrial", "arm", "n", "tox_count"});
  for (int k = 0; k < data.K; ++k)
    for (int arm : {kControl, kTreatment}) {
      const ArmData& cell = data.arms[arm][static_cast<std::size_t>(k)];
      b.row({std::to_string(k + 1), arm == kControl ? "control" : "treatment",
             std::to_string(cell.n), std::to_string(cell.tox_count)});
    }
  return b.str();
}

std::string trial_efficacy_csv(const TrialData& data) {
  CsvBuilder b({"subtrial", "arm", "value"});
  for (int k = 0; k < data.K; ++k)
    for (int arm : {kControl, kTreatment})
      for (double v : data.arms[arm][static_cast<std::size_t>(k)].eff)
        b.row({std::to_string(k + 1), arm == kControl ? "control" : "treatment",
               format_number(v)});
  return b.str();
}

}  // namespace bxn
