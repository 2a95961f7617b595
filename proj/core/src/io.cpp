#include "semidiag/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "semidiag/error.hpp"

namespace semidiag::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

Eigen::VectorXd parse_vector(std::istringstream& rest, const std::string& key) {
  std::vector<double> values;
  std::string token;
  while (rest >> token) {
    double v = 0.0;
    if (!parse_number(token, v)) throw DataError("model file: bad number '" + token + "' in " + key);
    values.push_back(v);
  }
  if (values.empty()) throw DataError("model file: " + key + " has no values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset load_csv(std::istream& in, const std::string& response_column,
                 const std::vector<std::string>& covariates) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty (header row required)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const std::vector<std::string> header = split_commas(line);
  const auto index_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("CSV has no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t response_idx = index_of(response_column);
  std::vector<std::string> names = covariates;
  if (names.empty()) {
    for (const auto& h : header) {
      if (h != response_column) names.push_back(h);
    }
  }
  std::vector<std::size_t> cov_idx;
  for (const auto& name : names) {
    if (name == response_column) throw DataError("response column listed as a covariate");
    cov_idx.push_back(index_of(name));
  }

  std::vector<double> response;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_commas(line);
    const std::size_t row = rows.size() + 1;
    const auto cell = [&](std::size_t col) {
      const std::string& column = header[col];
      if (col >= cells.size() || cells[col].empty()) {
        throw DataError("blank cell at row " + std::to_string(row) + " (line " +
                        std::to_string(line_no) + "), column '" + column + "'");
      }
      double v = 0.0;
      if (!parse_number(cells[col], v)) {
        throw DataError("non-numeric cell '" + cells[col] + "' at row " + std::to_string(row) +
                        " (line " + std::to_string(line_no) + "), column '" + column + "'");
      }
      return v;
    };
    const double y = cell(response_idx);
    if (y < 0.0) {
      throw DataError("negative response at row " + std::to_string(row) + " (line " +
                      std::to_string(line_no) + "), column '" + response_column + "'");
    }
    std::vector<double> x;
    for (std::size_t c : cov_idx) x.push_back(cell(c));
    response.push_back(y);
    rows.push_back(std::move(x));
  }

  Dataset data;
  data.response_name = response_column;
  data.column_names.push_back(kInterceptName);
  for (const auto& name : names) data.column_names.push_back(name);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(names.size() + 1);
  data.design.resize(n, d);
  data.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.response[i] = response[static_cast<std::size_t>(i)];
    data.design(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < d; ++j) {
      data.design(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
    }
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& response_column,
                 const std::vector<std::string>& covariates) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return load_csv(in, response_column, covariates);
}

std::vector<double> read_column(std::istream& in, const std::string& column) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty (header row required)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  const std::vector<std::string> header = split_commas(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw DataError("CSV has no column named '" + column + "'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_commas(line);
    double v = 0.0;
    if (col >= cells.size() || !parse_number(cells[col], v)) {
      throw DataError("bad cell at row " + std::to_string(out.size() + 1) + " (line " +
                      std::to_string(line_no) + "), column '" + column + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> read_column(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_column(in, column);
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << data.response_name;
  for (std::size_t j = 1; j < data.column_names.size(); ++j) out << ',' << data.column_names[j];
  out << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out << format_double(data.response[i]);
    for (Eigen::Index j = 1; j < data.cols(); ++j) out << ',' << format_double(data.design(i, j));
    out << '\n';
  }
}

void write_model(std::ostream& out, const ModelFile& file) {
  out << "semidiag-model-version " << kModelFormatVersion << '\n';
  out << "family " << models::family_name(file.model) << '\n';
  for (const auto& name : file.column_names) out << "column " << name << '\n';
  if (const auto* tp = std::get_if<models::TwoPartFit>(&file.model)) {
    out << "zero_coef " << join(tp->zero_coef) << '\n';
    if (const auto* g = std::get_if<models::GammaPart>(&tp->positive)) {
      out << "positive_coef " << join(g->coef) << '\n';
      out << "dispersion " << format_double(g->dispersion) << '\n';
    } else {
      const auto& b = std::get<models::GB2Part>(tp->positive);
      out << "positive_coef " << join(b.coef) << '\n';
      out << "gb2_a " << format_double(b.a) << '\n';
      out << "gb2_p " << format_double(b.p) << '\n';
      out << "gb2_q " << format_double(b.q) << '\n';
    }
  } else if (const auto* tw = std::get_if<models::TweedieFit>(&file.model)) {
    out << "coef " << join(tw->coef) << '\n';
    out << "phi " << format_double(tw->phi) << '\n';
    out << "power " << format_double(tw->power) << '\n';
  } else {
    const auto& tb = std::get<models::TobitFit>(file.model);
    out << "coef " << join(tb.coef) << '\n';
    out << "sigma " << format_double(tb.sigma) << '\n';
    out << "limit " << format_double(tb.limit) << '\n';
  }
}

ModelFile read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model file is empty");
  {
    std::istringstream first(line);
    std::string tag;
    int version = 0;
    if (!(first >> tag >> version) || tag != "semidiag-model-version") {
      throw DataError("model file: missing version line");
    }
    if (version != kModelFormatVersion) {
      throw DataError("model file: unsupported version " + std::to_string(version));
    }
  }
  ModelFile file;
  std::string family;
  std::map<std::string, Eigen::VectorXd> fields;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream rest(line);
    std::string key;
    rest >> key;
    if (key == "family") {
      rest >> family;
    } else if (key == "column") {
      std::string name;
      std::getline(rest >> std::ws, name);
      file.column_names.push_back(trim(name));
    } else {
      if (fields.count(key) != 0) throw DataError("model file: duplicate field " + key);
      fields[key] = parse_vector(rest, key);
    }
  }
  const auto vec = [&](const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw DataError("model file: missing field " + key);
    return it->second;
  };
  const auto scalar = [&](const std::string& key) {
    const Eigen::VectorXd v = vec(key);
    if (v.size() != 1) throw DataError("model file: field " + key + " must be a scalar");
    return v[0];
  };
  const auto d = static_cast<Eigen::Index>(file.column_names.size());
  const auto check_len = [&](const Eigen::VectorXd& v, const std::string& key) {
    if (v.size() != d) {
      throw DataError("model file: " + key + " has " + std::to_string(v.size()) +
                      " values for " + std::to_string(d) + " columns");
    }
    return v;
  };
  const auto positive = [](double v, const std::string& key) {
    if (!(v > 0.0)) throw DataError("model file: " + key + " must be positive");
    return v;
  };
  if (family == "twopart-gamma") {
    models::TwoPartFit fit;
    fit.zero_coef = check_len(vec("zero_coef"), "zero_coef");
    fit.positive = models::GammaPart{check_len(vec("positive_coef"), "positive_coef"),
                                     positive(scalar("dispersion"), "dispersion")};
    file.model = fit;
  } else if (family == "twopart-gb2") {
    models::TwoPartFit fit;
    fit.zero_coef = check_len(vec("zero_coef"), "zero_coef");
    fit.positive = models::GB2Part{check_len(vec("positive_coef"), "positive_coef"),
                                   positive(scalar("gb2_a"), "gb2_a"),
                                   positive(scalar("gb2_p"), "gb2_p"),
                                   positive(scalar("gb2_q"), "gb2_q")};
    file.model = fit;
  } else if (family == "tweedie") {
    const double power = scalar("power");
    if (!(power > 1.0 && power < 2.0)) throw DataError("model file: power must lie in (1, 2)");
    file.model = models::TweedieFit{check_len(vec("coef"), "coef"), positive(scalar("phi"), "phi"),
                                    power};
  } else if (family == "tobit") {
    file.model = models::TobitFit{check_len(vec("coef"), "coef"),
                                  positive(scalar("sigma"), "sigma"), scalar("limit")};
  } else {
    throw DataError("model file: unknown family '" + family + "'");
  }
  return file;
}

ModelFile read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return read_model(in);
}

}  // namespace semidiag::io
