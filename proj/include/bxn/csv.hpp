#pragma once

#include <string>
#include <vector>

#include "bxn/oc.hpp"
#include "bxn/trial_data.hpp"

namespace bxn {

/// Shortest decimal rendering that round-trips to the same double.
/// Locale independent: '.' decimal point, no grouping.
std::string format_number(double v);

/// RFC-4180 field: quoted (with doubled quotes) when it contains a comma,
/// quote or line break, verbatim otherwise.
std::string csv_field(const std::string& s);

/// Accumulates an RFC-4180 document: header row first, CRLF row endings,
/// fixed arity checked per row.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
};

/// Parses an RFC-4180 document into rows of fields (handles quoted fields,
/// embedded quotes/newlines, CRLF and LF). Throws ConfigError on a dangling
/// quote or ragged row, naming the row number.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// One row per OCRow, in report order.
std::string oc_report_csv(const OCReport& report);

/// One row per (scenario, metric, model) ranking entry.
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// Builds TrialData from a counts table (subtrial, arm, n, tox_count) and a
/// long-format efficacy table (subtrial, arm, value). Subtrials are 1-based,
/// arm is "control" or "treatment". Every (subtrial, arm) cell must appear in
/// the counts table exactly once; efficacy rows per cell must number exactly
/// n (or 0 for a toxicity-only cell). Throws ConfigError naming row and
/// column on any schema violation.
TrialData parse_trial_csv(const std::string& counts_text, const std::string& efficacy_text);

std::string trial_counts_csv(const TrialData& data);
std::string trial_efficacy_csv(const TrialData& data);

}  // namespace bxn
