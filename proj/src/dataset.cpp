#include "psguard/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "dataset_io";

[[noreturn]] void data_error(const std::string& msg) { throw Error(ErrorKind::Data, kModule, msg); }

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::pair<std::string, int>> encode_labels(const std::set<std::string>& labels,
                                                       const std::optional<std::string>& benign) {
  std::string zero;
  if (benign) {
    zero = *benign;
  } else {
    for (const auto& l : labels) {
      auto ll = lower(l);
      if (ll == "benign" || ll == "normal") {
        zero = l;
        break;
      }
    }
    if (zero.empty()) {
      if (labels.size() != 2) {
        data_error("cannot infer the benign label among " + std::to_string(labels.size()) +
                   " distinct labels; pass --benign-label");
      }
      zero = *labels.begin();
    }
  }
  std::vector<std::pair<std::string, int>> enc;
  for (const auto& l : labels) enc.emplace_back(l, l == zero ? 0 : 1);
  return enc;
}

}  // namespace

void Dataset::check() const {
  if (x.rows() != y.size()) {
    throw Error(ErrorKind::Internal, kModule, "row count does not match label count");
  }
  if (x.cols() != feature_names.size() && !(x.rows() == 0 && x.cols() == 0)) {
    throw Error(ErrorKind::Internal, kModule, "column count does not match feature names");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Data, kModule, "non-finite value in dataset");
  }
  for (int label : y) {
    if (label != 0 && label != 1) throw Error(ErrorKind::Data, kModule, "labels must be 0 or 1");
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.x = x.select_rows(indices);
  if (indices.empty()) out.x = Matrix(0, feature_names.size());
  out.y.reserve(indices.size());
  for (auto i : indices) out.y.push_back(y.at(i));
  return out;
}

LoadedCsv read_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) data_error("empty CSV input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line);

  std::optional<std::size_t> label_idx;
  std::vector<std::size_t> feature_idx;
  LoadedCsv out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == options.label_column) {
      label_idx = i;
    } else if (std::find(options.exclude.begin(), options.exclude.end(), header[i]) ==
               options.exclude.end()) {
      feature_idx.push_back(i);
      out.data.feature_names.push_back(header[i]);
    }
  }
  if (!label_idx) data_error("label column '" + options.label_column + "' not found in header");
  {
    std::set<std::string> names(out.data.feature_names.begin(), out.data.feature_names.end());
    if (names.size() != out.data.feature_names.size()) data_error("duplicate column names in header");
  }
  for (const auto& name : out.data.feature_names) out.report.per_column_failures[name] = 0;
  out.report.per_column_failures[options.label_column] = 0;

  std::vector<std::string> raw_labels;
  std::vector<double> values(feature_idx.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++out.report.rows_read;
    auto fields = split_record(line);
    if (fields.size() != header.size()) {
      data_error("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                 " fields, found " + std::to_string(fields.size()));
    }
    bool ok = true;
    for (std::size_t j = 0; j < feature_idx.size(); ++j) {
      auto v = to_number(fields[feature_idx[j]]);
      if (!v) {
        ++out.report.per_column_failures[out.data.feature_names[j]];
        ok = false;
      } else {
        values[j] = *v;
      }
    }
    const std::string& label = fields[*label_idx];
    if (label.empty()) {
      ++out.report.per_column_failures[options.label_column];
      ok = false;
    }
    if (!ok) {
      ++out.report.rows_dropped;
      continue;
    }
    out.data.x.append_row(values);
    raw_labels.push_back(label);
  }
  if (raw_labels.empty()) data_error("no usable rows after dropping non-numeric and missing values");
  if (feature_idx.empty()) data_error("no feature columns");

  std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
  out.report.label_encoding = encode_labels(distinct, options.benign_label);
  std::map<std::string, int> enc(out.report.label_encoding.begin(), out.report.label_encoding.end());
  out.data.y.reserve(raw_labels.size());
  for (const auto& l : raw_labels) out.data.y.push_back(enc.at(l));
  out.data.check();
  return out;
}

LoadedCsv load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) data_error("cannot open dataset '" + path.string() + "'");
  return read_csv(in, options);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::Usage, kModule, "test fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = data.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    data_error("degenerate split: " + std::to_string(n) + " rows with test fraction " +
               std::to_string(test_fraction));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.select_rows(train), data.select_rows(test)};
}

std::string_view to_string(ScalerMethod m) {
  return m == ScalerMethod::Standardize ? "standardize" : "minmax";
}

ScalerMethod parse_scaler_method(std::string_view text) {
  if (text == "standardize") return ScalerMethod::Standardize;
  if (text == "minmax") return ScalerMethod::MinMax;
  throw Error(ErrorKind::Usage, kModule, "unknown scaler '" + std::string(text) + "'");
}

ScalerParams fit_scaler(const Dataset& train, ScalerMethod method) {
  if (train.size() == 0) data_error("cannot fit a scaler on an empty training set");
  const std::size_t n = train.x.rows();
  const std::size_t d = train.x.cols();
  ScalerParams p{method, std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    auto col = train.x.column(j);
    const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
    if (method == ScalerMethod::MinMax) {
      p.a[j] = *mn;
      p.b[j] = *mx;
      continue;
    }
    double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(n));
    p.a[j] = *mn == *mx ? col.front() : mean;
    p.b[j] = (*mn == *mx || sd == 0.0) ? 1.0 : sd;
  }
  return p;
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& x) {
  if (x.cols() != params.a.size() || params.a.size() != params.b.size()) {
    data_error("scaler expects " + std::to_string(params.a.size()) + " columns, got " +
               std::to_string(x.cols()));
  }
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double a = params.a[j];
      const double b = params.b[j];
      double& v = out(r, j);
      if (params.method == ScalerMethod::Standardize) {
        v = (v - a) / b;
      } else {
        v = b == a ? 0.0 : (v - a) / (b - a);
      }
    }
  }
  return out;
}

Dataset apply_scaler(const ScalerParams& params, const Dataset& data) {
  Dataset out = data;
  out.x = apply_scaler(params, data.x);
  return out;
}

std::size_t count_label(const Labels& y, int label) {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

Dataset undersample(const Dataset& train, std::uint64_t seed) {
  const std::size_t n0 = count_label(train.y, 0);
  const std::size_t n1 = count_label(train.y, 1);
  if (n0 == 0 || n1 == 0) data_error("undersampling needs both classes present");
  const int majority = n0 > n1 ? 0 : 1;
  const std::size_t keep = std::min(n0, n1);

  std::vector<std::size_t> major;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.y[i] == majority) major.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(major.begin(), major.end(), rng);
  std::vector<char> selected(train.size(), 0);
  for (std::size_t i = 0; i < train.size(); ++i) selected[i] = train.y[i] != majority;
  for (std::size_t k = 0; k < keep; ++k) selected[major[k]] = 1;

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (selected[i]) rows.push_back(i);
  }
  return train.select_rows(rows);
}

}  // namespace psguard
