#pragma once

// Serialization boundary: POMDP instances, constraint systems, polynomial
// systems and solver reports as JSON; bounds tables and batch statistics as
// CSV.  JSON is the contractual instance format; CSV is the hand-off format
// for external tabulation.

#include <string>

#include <json.hpp>

#include "sarop/constraints.hpp"
#include "sarop/optimize.hpp"
#include "sarop/polynomial.hpp"
#include "sarop/pomdp.hpp"

namespace sarop {

using Json = nlohmann::json;

// Instance document: n_states, n_actions, n_observations, gamma, mu,
// g_beta (observation index per state), alpha (array over flattened (s, a)
// of next-state distributions) and reward (array over states of arrays over
// actions).  All numbers decimal floating point.
Json pomdp_to_json(const Pomdp& model);

// Inverse of pomdp_to_json; validates the result and throws
// std::invalid_argument listing the violations of an inconsistent document.
Pomdp pomdp_from_json(const Json& document);

// File wrappers.  load_pomdp throws std::runtime_error when the file cannot
// be read and nlohmann::json::parse_error (with byte location) on malformed
// JSON.
Pomdp load_pomdp(const std::string& path);
void save_pomdp(const Pomdp& model, const std::string& path);

// Linear, determinantal-minor and reduced quadratic constraints of an
// instance as term lists over the flattened eta coordinates, each with a
// kind tag and its defining indices.
Json constraints_to_json(const Pomdp& model, const Anchors& anchors);

// Polynomial system dump/restore: variable names plus per-equation term
// lists (dense exponent vector, [re, im] coefficient).
Json system_to_json(const PolySystem& system);
PolySystem system_from_json(const Json& document);

// Full solver report: totals, per-component counts and bounds, the winning
// policy/frequency/value, and (optionally) every classified solution with
// complex coordinates, residual, status and flags.
Json report_to_json(const SolveReport& report, bool include_solutions);

// Batch statistics as JSON (per-method means, sds and raw counts).
Json batch_to_json(const BatchResult& batch);

// CSV escaping per RFC 4180: quotes a field when it contains commas, quotes
// or newlines.
std::string csv_quote(const std::string& field);

// Shortest round-trip decimal rendering of a double.
std::string format_double(double value);

// Partition rendering used by tables and CSV, e.g. (2,1) -> "2,1".
std::string format_partition(const std::vector<int>& fiber_sizes);

// Bounds table: one row per partition.
// Columns: partition, n_actions, components_total, components_relevant,
// bound_total, bound_relevant.
std::string bounds_csv_header();
std::string bounds_csv_row(const std::vector<int>& fiber_sizes, int n_actions,
                           const BoundSummary& summary);

// Batch statistics: one row per method.
// Columns: partition, method, complex_mean, complex_sd, real_mean, real_sd,
// positive_mean, positive_sd, value_agreement_max_gap.
std::string batch_csv_header();
std::string batch_csv_rows(const BatchResult& batch);

}  // namespace sarop
