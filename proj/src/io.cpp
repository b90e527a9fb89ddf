#include "jointcheck/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jointcheck {

std::string config_hash(const nlohmann::json& config) {
  const std::string dump = config.dump();  // object keys already sorted
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_double(double x) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows,
               const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "# config_hash=" << hash << " version=" << kArtifactVersion << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << columns[c] << (c + 1 < columns.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw std::logic_error("write_csv: row width mismatch");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << (c + 1 < row.size() ? "," : "");
    }
    out << "\n";
  }
}

void write_ecdf_csv(const std::filesystem::path& path, const EmpiricalCDF& cdf,
                    const std::string& hash) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(cdf.size());
  const auto support = cdf.support();
  const auto cumulative = cdf.cumulative();
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    rows.push_back({format_double(support[i]), format_double(cumulative[i])});
  }
  write_csv(path, {"support", "cumulative_weight"}, rows, hash);
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  if (data.is_scalar()) {
    out << "value\n";
    for (double v : data.scalar().values) out << format_double(v) << "\n";
    return;
  }
  const auto& reg = data.regression();
  const auto& X = *reg.covariates;
  out << "y";
  for (Eigen::Index j = 0; j < X.cols(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out << format_double(reg.response(i));
    for (Eigen::Index j = 0; j < X.cols(); ++j) out << "," << format_double(X(i, j));
    out << "\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw std::runtime_error("dataset CSV has no header");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields");
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(parse_double(f, path.string() + ":" + std::to_string(line_no)));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("dataset CSV has no rows");

  if (header.size() == 1) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(r[0]);
    return make_scalar_dataset(std::move(values));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1;
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rows[static_cast<std::size_t>(i)][0];
    for (Eigen::Index j = 0; j < d; ++j) {
      X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1];
    }
  }
  Dataset data{RegressionData{std::make_shared<const Eigen::MatrixXd>(std::move(X)),
                              std::move(y)}};
  data.validate();
  return data;
}

void reject_unknown_keys(const nlohmann::json& object,
                         const std::vector<std::string>& allowed,
                         const std::string& context) {
  if (!object.is_object()) {
    throw std::invalid_argument(context + ": expected a JSON object");
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument(context + ": unknown field '" + key + "'");
    }
  }
}

}  // namespace jointcheck
