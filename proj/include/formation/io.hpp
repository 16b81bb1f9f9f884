#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "formation/config.hpp"
#include "formation/controller.hpp"
#include "formation/criterion.hpp"
#include "formation/model.hpp"
#include "formation/pairwise.hpp"
#include "formation/simulation.hpp"

namespace formation::io {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays.
Json to_json(const Matrix& M);
Json to_json(const Vector& v);
Matrix matrix_from_json(const Json& j, const std::string& where);
Vector vector_from_json(const Json& j, const std::string& where);

/// Formation spec file: {"n", "m", "agents": [{"A", "B"}], "edges":
/// [{"from", "to", "d"}]}. Parsing checks only the encoding (ParseError);
/// the model is checked by validate().
Json to_json(const FormationSpec& spec);
FormationSpec spec_from_json(const Json& j);

/// Controller file: {"n", "m", "followers": [{"node", "S", "K": [{"parent",
/// "gain"}], "k", "N", "k_tilde"}]}. N and k_tilde are optional on input;
/// when present they must agree with the raw gains (InvalidInput otherwise).
Json to_json(const ControllerSet& ctrl);
ControllerSet controller_from_json(const Json& j, const LevelDecomposition& decomp);

Json to_json(const RunConfig& config);
RunConfig config_from_json(const Json& j);

Json to_json(const CriterionReport& report);
Json to_json(const ControllerVerification& v);
Json to_json(const PairwiseReport& report);
Json to_json(const EnvelopeFit& fit);

/// Columns: time, x_k[1..n] for agents in renumbered order, then z_i_j[1..n]
/// for edges sorted by renumbered (from, to).
void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                     const LevelDecomposition& decomp);

/// File helpers; failures raise ParseError (reading) or InvalidInput (writing).
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

FormationSpec load_spec(const std::string& path);
ControllerSet load_controller(const std::string& path, const LevelDecomposition& decomp);
RunConfig load_config(const std::string& path);

}  // namespace formation::io
