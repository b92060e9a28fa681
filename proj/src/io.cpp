#include "scarsim/io.hpp"

#include <cstdio>
#include <sstream>

namespace scarsim {

namespace fs = std::filesystem;

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x + 0.0);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(const fs::path& path,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()), path_(path) {
  if (!out_) throw InvalidArgument("cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw InvalidArgument(path_.string() + ": row has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> f;
  f.reserve(values.size());
  for (double v : values) f.push_back(format_number(v));
  row(f);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidArgument("CSV has no column \"" + name + "\"");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& s = rows[r].at(c);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
      throw InvalidArgument("CSV row " + std::to_string(r + 2) + ", column \"" +
                            name + "\": not a number: \"" + s + "\"");
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw InvalidArgument(path.string() + ": unterminated quote");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw InvalidArgument(path.string() + ": empty CSV");

  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw InvalidArgument(path.string() + ": line " + std::to_string(r + 1) +
                            " has " + std::to_string(records[r].size()) +
                            " fields, expected " +
                            std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_quench_csv(const fs::path& path, const QuenchResult& r) {
  r.validate();
  const std::size_t n_sites =
      r.site_populations.empty() ? 0 : r.site_populations.front().size();
  std::vector<std::string> header{"time_us", "n_a", "n_b", "imbalance"};
  for (std::size_t i = 0; i < n_sites; ++i)
    header.push_back("n_" + std::to_string(i));
  for (int cut : r.entropy_cuts) header.push_back("S_" + std::to_string(cut));
  CsvWriter w(path, header);
  for (std::size_t k = 0; k < r.size(); ++k) {
    std::vector<double> row{r.times[k], r.n_a[k], r.n_b[k], r.n_a[k] - r.n_b[k]};
    for (double p : r.site_populations[k]) row.push_back(p);
    for (const auto& s : r.entropies) row.push_back(s[k]);
    w.row(row);
  }
}

void write_microstates_csv(const fs::path& path, const QuenchResult& r) {
  if (r.microstate_probs.empty())
    throw InvalidArgument("quench result carries no microstate data");
  std::vector<std::string> header{"time_us"};
  for (std::size_t c = 0; c < r.microstate_probs.front().size(); ++c)
    header.push_back("class_" + std::to_string(c + 1));
  CsvWriter w(path, header);
  for (std::size_t k = 0; k < r.size(); ++k) {
    std::vector<double> row{r.times[k]};
    row.insert(row.end(), r.microstate_probs[k].begin(),
               r.microstate_probs[k].end());
    w.row(row);
  }
}

StoredSeries read_quench_series(const fs::path& path) {
  const auto t = read_csv(path);
  return {t.numbers("time_us"), t.numbers("imbalance")};
}

void write_spectrum_csv(const fs::path& path, const Spectrum& s, double rabi,
                        std::optional<double> omegam) {
  std::vector<std::string> header{"omega_rad_us", "omega_over_rabi", "s2"};
  std::optional<Spectrum> half;
  if (omegam) {
    header.push_back("s2_half_reference");
    half = recalibrated(s, *omegam / 2.0);
  }
  CsvWriter w(path, header);
  for (std::size_t k = 0; k < s.omegas.size(); ++k) {
    std::vector<double> row{s.omegas[k], s.omegas[k] / rabi, s.s2[k]};
    if (half) row.push_back(half->s2[k]);
    w.row(row);
  }
}

}  // namespace scarsim
