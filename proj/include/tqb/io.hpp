// io.hpp - JSON form of density matrices and the CSV writer used by the CLI.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tqb/core.hpp"

namespace tqb {

using Json = nlohmann::json;

/// {"basis": "...", "re": [[..]], "im": [[..]]}, row-major.
inline Json to_json(const DensityMatrix& rho) {
  Json re = Json::array(), im = Json::array();
  for (int i = 0; i < 4; ++i) {
    Json rr = Json::array(), ir = Json::array();
    for (int j = 0; j < 4; ++j) {
      rr.push_back(rho(i, j).real());
      ir.push_back(rho(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  return Json{{"basis", std::string(to_string(rho.basis()))}, {"re", re}, {"im", im}};
}

inline DensityMatrix density_matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("re")) throw UsageError("density matrix JSON needs at least a \"re\" array");
  const Basis basis = basis_from_string(j.value("basis", std::string("computational")));
  auto read = [](const Json& rows, const char* name) {
    if (!rows.is_array() || rows.size() != 4) throw UsageError(std::string("\"") + name + "\" must be a 4x4 array");
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i) {
      const Json& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != 4) throw UsageError(std::string("\"") + name + "\" must be a 4x4 array");
      for (int k = 0; k < 4; ++k) {
        const Json& v = row[static_cast<std::size_t>(k)];
        if (!v.is_number()) throw UsageError(std::string("\"") + name + "\" entries must be numbers");
        m(i, k) = v.get<double>();
      }
    }
    return m;
  };
  const Eigen::Matrix4d re = read(j.at("re"), "re");
  const Eigen::Matrix4d im = j.contains("im") ? read(j.at("im"), "im") : Eigen::Matrix4d::Zero();
  Matrix4c m;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = Complex(re(i, k), im(i, k));
  return DensityMatrix(m, basis);
}

/// CSV with '#'-prefixed metadata lines ahead of the column header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& meta, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw UsageError("cannot open output file " + path);
    for (const auto& line : meta) out_ << "# " << line << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
    width_ = columns.size();
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw Error("CsvWriter: row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

}  // namespace tqb
