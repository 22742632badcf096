#include "nof1/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nof1/errors.hpp"
#include "nof1/stats.hpp"

namespace nof1 {

std::vector<double> TimeSeriesDataset::outcomes() const {
  std::vector<double> out;
  out.reserve(periods.size());
  for (const auto& p : periods) out.push_back(p.y);
  return out;
}

std::vector<int> TimeSeriesDataset::exposures() const {
  std::vector<int> out;
  out.reserve(periods.size());
  for (const auto& p : periods) out.push_back(p.x);
  return out;
}

std::size_t TimeSeriesDataset::exog_index(const std::string& name) const {
  const auto it = std::find(exog_names.begin(), exog_names.end(), name);
  if (it == exog_names.end()) {
    throw DataError("exogenous column '" + name + "' not present in dataset");
  }
  return static_cast<std::size_t>(it - exog_names.begin());
}

void TimeSeriesDataset::validate() const {
  for (std::size_t i = 0; i < periods.size(); ++i) {
    const auto& p = periods[i];
    if (p.t != static_cast<int>(i) + 1) {
      throw DataError("period indices must be contiguous from 1; found t=" +
                      std::to_string(p.t) + " at position " + std::to_string(i + 1));
    }
    if (!std::isfinite(p.y)) {
      throw DataError("non-finite outcome at t=" + std::to_string(p.t));
    }
    if (p.x != 0 && p.x != 1) {
      throw DataError("exposure must be 0 or 1 at t=" + std::to_string(p.t));
    }
    if (p.exog.size() != exog_names.size()) {
      throw DataError("exogenous values at t=" + std::to_string(p.t) +
                      " do not match the dataset's columns");
    }
  }
}

TimeSeriesDataset make_dataset(const std::vector<double>& y, const std::vector<int>& x) {
  if (y.size() != x.size()) throw DataError("outcome and exposure lengths differ");
  TimeSeriesDataset ds;
  ds.periods.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    ds.periods.push_back({static_cast<int>(i) + 1, y[i], x[i], {}});
  }
  ds.validate();
  return ds;
}

Dichotomized dichotomize_exposure(const std::vector<double>& values) {
  if (values.size() < 2) throw DataError("dichotomization needs at least 2 values");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("dichotomization input contains a non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    throw DataError("cannot dichotomize: every value equals " + format_double(*lo));
  }
  Dichotomized out;
  out.threshold = median(values);
  out.binary.reserve(values.size());
  for (double v : values) out.binary.push_back(v > out.threshold ? 1 : 0);
  return out;
}

std::vector<double> log10_transform(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) {
      throw DataError("log10 transform needs positive values; index " + std::to_string(i) +
                      " holds " + format_double(values[i]));
    }
    out.push_back(std::log10(values[i]));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) + ": column '" + column +
                    "' is not a finite number: '" + cell + "'");
  }
  return v;
}

}  // namespace

TimeSeriesDataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 3 || header[0] != "t" || header[1] != "y" || header[2] != "x") {
    throw DataError("line " + std::to_string(line_no) + ": header must start with t,y,x");
  }

  TimeSeriesDataset ds;
  ds.exog_names.assign(header.begin() + 3, header.end());
  std::vector<double> raw_x;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    PeriodRecord rec;
    const double t = parse_number(cells[0], line_no, "t");
    if (t != std::floor(t)) {
      throw DataError("line " + std::to_string(line_no) + ": t must be an integer");
    }
    rec.t = static_cast<int>(t);
    rec.y = parse_number(cells[1], line_no, "y");
    raw_x.push_back(parse_number(cells[2], line_no, "x"));
    for (std::size_t c = 3; c < cells.size(); ++c) {
      rec.exog.push_back(parse_number(cells[c], line_no, header[c]));
    }
    if (rec.t != static_cast<int>(ds.periods.size()) + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected t=" +
                      std::to_string(ds.periods.size() + 1) + ", found t=" + cells[0]);
    }
    ds.periods.push_back(std::move(rec));
    row_lines.push_back(line_no);
  }
  if (ds.periods.empty()) throw DataError("dataset has no rows");

  const bool binary = std::all_of(raw_x.begin(), raw_x.end(),
                                  [](double v) { return v == 0.0 || v == 1.0; });
  if (binary) {
    for (std::size_t i = 0; i < raw_x.size(); ++i) ds.periods[i].x = static_cast<int>(raw_x[i]);
  } else if (opts.dichotomize) {
    const auto d = dichotomize_exposure(raw_x);
    for (std::size_t i = 0; i < raw_x.size(); ++i) ds.periods[i].x = d.binary[i];
  } else {
    const auto bad = std::find_if(raw_x.begin(), raw_x.end(),
                                  [](double v) { return v != 0.0 && v != 1.0; });
    throw DataError("line " + std::to_string(row_lines[bad - raw_x.begin()]) +
                    ": x is not binary; enable dichotomize to split at the median");
  }

  if (opts.log10_outcome) {
    std::vector<double> y = ds.outcomes();
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(y[i] > 0.0)) {
        throw DataError("line " + std::to_string(row_lines[i]) +
                        ": log10 outcome transform needs y > 0");
      }
    }
    y = log10_transform(y);
    for (std::size_t i = 0; i < y.size(); ++i) ds.periods[i].y = y[i];
  }
  ds.validate();
  return ds;
}

TimeSeriesDataset read_dataset_csv(const std::string& path, const CsvReadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return read_dataset_csv(in, opts);
}

void write_dataset_csv(std::ostream& out, const TimeSeriesDataset& ds) {
  out << "t,y,x";
  for (const auto& n : ds.exog_names) out << ',' << n;
  out << '\n';
  for (const auto& p : ds.periods) {
    out << p.t << ',' << format_double(p.y) << ',' << p.x;
    for (double v : p.exog) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace nof1
