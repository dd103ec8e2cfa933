#pragma once

#include <string>

#include "json.hpp"

#include "formeq/torus.hpp"

namespace formeq {

using json = nlohmann::json;

// Matrices: array of rows; an entry is a number or [re, im].
Mat parse_matrix(const json& j, const std::string& where);
json matrix_to_json(const Mat& A);

// Bundle sub-schema: {n, components: [{k, entries: [[I, J, re, im], ...]}], f, rho}
// with 1-based index arrays I, J.
FormBundle parse_bundle(const json& j, int n, const Mat& rho, const std::string& where);
json bundle_to_json(const FormBundle& b);

// Problem file: {n, N, rho, omega0, bundle, f, kappa?} where f is a number, a
// {"grid": [...]} row-major field, or {"manufactured": {"modes": [...]}}.
TorusProblem parse_problem(const json& j);

// Band-limited field from cosine modes: sum amp cos(2 pi k.x + phase).
RealField field_from_modes(const GridShape& g, const json& modes);

json cone_report_to_json(const ConeReport& r);
json trace_to_json(const SolveTrace& t);

void write_text(const std::string& path, const std::string& body);
std::string field_to_csv(const RealField& u);
std::string steps_to_csv(const SolveTrace& t);

} // namespace formeq
