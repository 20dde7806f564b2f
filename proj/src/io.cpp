#include "sloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sloc::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_row(const std::vector<double>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += format_double(cells[i]);
  }
  row += '\n';
  return row;
}

ordered_json measure_to_json(const measures::DiscreteMeasure& mu) {
  ordered_json j;
  j["dim"] = mu.dim();
  ordered_json atoms = ordered_json::array();
  for (int i = 0; i < mu.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < mu.dim(); ++c) row.push_back(mu.atoms()(i, c));
    atoms.push_back(std::move(row));
  }
  j["atoms"] = std::move(atoms);
  ordered_json weights = ordered_json::array();
  const Eigen::VectorXd w = mu.weights();
  for (int i = 0; i < mu.size(); ++i) weights.push_back(w(i));
  j["weights"] = std::move(weights);
  return j;
}

measures::DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("atoms") || !j.contains("weights")) {
    throw ParseError("measure JSON needs fields dim, atoms, weights");
  }
  int dim;
  try {
    dim = j.at("dim").get<int>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("measure JSON: dim must be an integer");
  }
  if (dim < 1) throw ParseError("measure JSON: dim must be >= 1");
  const auto& atoms_j = j.at("atoms");
  const auto& weights_j = j.at("weights");
  if (!atoms_j.is_array() || atoms_j.empty() || !weights_j.is_array()) {
    throw ParseError("measure JSON: atoms and weights must be non-empty arrays");
  }
  if (atoms_j.size() != weights_j.size()) {
    throw ParseError("measure JSON: atom and weight counts differ");
  }
  const auto k = static_cast<Eigen::Index>(atoms_j.size());
  Eigen::MatrixXd atoms(k, dim);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& row = atoms_j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw ParseError("measure JSON: atom " + std::to_string(i) + " is not a length-" +
                       std::to_string(dim) + " array");
    }
    for (int c = 0; c < dim; ++c) {
      if (!row.at(static_cast<std::size_t>(c)).is_number()) {
        throw ParseError("measure JSON: atom coordinates must be numbers");
      }
      atoms(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  Eigen::VectorXd weights(k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& cell = weights_j.at(static_cast<std::size_t>(i));
    if (!cell.is_number()) throw ParseError("measure JSON: weights must be numbers");
    weights(i) = cell.get<double>();
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i))) {
      throw ParseError("measure JSON: weights must be finite and >= 0");
    }
    total += weights(i);
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ParseError("measure JSON: weights sum to " + format_double(total) +
                     ", more than 1e-6 away from 1");
  }
  return measures::DiscreteMeasure::from_linear_weights(atoms, weights);
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix JSON must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j.at(0).is_array() || j.at(0).empty()) {
    throw ParseError("matrix JSON rows must be non-empty arrays");
  }
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("matrix JSON: ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row.at(static_cast<std::size_t>(c)).is_number()) {
        throw ParseError("matrix JSON: entries must be numbers");
      }
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json report_to_json(const verify::InequalityReport& rep) {
  ordered_json j;
  j["which"] = rep.which;
  if (rep.lhs.size() == 1) {
    j["lhs"] = rep.lhs(0, 0);
    j["rhs"] = rep.rhs(0, 0);
  } else {
    j["lhs"] = matrix_to_json(rep.lhs);
    j["rhs"] = matrix_to_json(rep.rhs);
  }
  j["slack"] = rep.slack;
  j["ci_slack"] = rep.ci_slack;
  j["pass"] = rep.pass;
  j["n_samples"] = rep.n_samples;
  j["seed"] = rep.seed;
  return j;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("E_IO", "cannot open " + path + " for writing");
  out << contents;
  if (!out) throw Error("E_IO", "failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("E_IO", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sloc::io
