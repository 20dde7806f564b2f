#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>
#include <json.hpp>

#include "sloc/measure.hpp"
#include "sloc/verify.hpp"

namespace sloc::io {

using ordered_json = nlohmann::ordered_json;

// 17 significant digits; round-trip exact for doubles, locale-independent.
std::string format_double(double v);

// One CSV line from numeric cells, '.' decimal separator, LF terminator.
std::string csv_row(const std::vector<double>& cells);

// {"dim": n, "atoms": [[...], ...], "weights": [...]} with linear weights.
// On load, weights off by at most 1e-6 from total 1 are renormalized;
// anything worse is a ParseError.
ordered_json measure_to_json(const measures::DiscreteMeasure& mu);
measures::DiscreteMeasure measure_from_json(const nlohmann::json& j);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
ordered_json matrix_to_json(const Eigen::MatrixXd& m);

ordered_json report_to_json(const verify::InequalityReport& rep);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace sloc::io
