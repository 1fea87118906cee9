#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cvcsp/core.hpp"
#include "cvcsp/ggraph.hpp"
#include "cvcsp/mmorph.hpp"
#include "cvcsp/pipeline.hpp"

namespace cvcsp::io {

using nlohmann::json;

/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string dump(const json& doc);
json parse_text(const std::string& text);
json load_file(const std::filesystem::path& path);

json language_to_json(const Language& language);
Language language_from_json(const json& doc);

json instance_to_json(const Instance& instance);
/// The "language" member may be an inline document or a file reference
/// resolved against base_dir.
Instance instance_from_json(const json& doc,
                            const std::filesystem::path& base_dir = {});

json classification_to_json(const Classification& c, const Domain& domain);
/// Reads a witness document back; verdict must be "tractable" to carry
/// tables.
Classification classification_from_json(const json& doc, const Domain& domain);

json violation_to_json(const Violation& v, const Domain& domain);
json solution_to_json(const Solution& s, const Domain& domain, bool verbose);

json graph_report(const GammaGraph& g, bool truncated, const Domain& domain);

}  // namespace cvcsp::io
