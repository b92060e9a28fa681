#pragma once

// Plain-file outputs: RFC-4180 CSV with round-trippable numbers, and JSON.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scarsim/analysis.hpp"
#include "scarsim/quench_result.hpp"

namespace scarsim {

/// %.17g, so parsing the text gives back the same double. -0 prints as 0.
std::string format_number(double x);

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
  std::filesystem::path path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws InvalidArgument when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
};

/// Reads an RFC-4180 file (CRLF or LF line ends, quoted fields).
CsvTable read_csv(const std::filesystem::path& path);

/// Two-space indented dump plus a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// quench.csv: time_us, n_a, n_b, imbalance, n_<i> per site, S_<k> per cut.
void write_quench_csv(const std::filesystem::path& path, const QuenchResult& r);
/// microstates.csv: time_us then one column per class, in ordering order.
void write_microstates_csv(const std::filesystem::path& path,
                           const QuenchResult& r);

/// Time and imbalance columns of a stored quench.csv.
struct StoredSeries {
  std::vector<double> times;
  std::vector<double> imbalance;
};
StoredSeries read_quench_series(const std::filesystem::path& path);

/// spectrum.csv: omega_rad_us, omega_over_rabi, s2 and, when omegam is
/// given, s2_half_reference (the spectrum calibrated at omegam / 2).
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s,
                        double rabi, std::optional<double> omegam);

}  // namespace scarsim
