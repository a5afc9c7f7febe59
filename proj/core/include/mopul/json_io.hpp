#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mopul/bounds.hpp"
#include "mopul/model.hpp"
#include "mopul/solver.hpp"

namespace mopul {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// Schema "mopul-problem-v1": full round trip of a problem definition.
Json problem_to_json(const MopulProblem& problem);
MopulProblem problem_from_json(const Json& j);

/// Schema "mopul-solution-v1".
Json solution_to_json(const Solution& solution, const ExtractedSolution& extracted);

struct LoadedSolution {
    std::string status;
    double objective = 0.0;
    ExtractedSolution extracted;
};
LoadedSolution solution_from_json(const Json& j);

/// Schema "mopul-certificate-v1".
Json certificate_to_json(const BoundCertificate& cert);

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t seed = 0;
    std::vector<std::string> artifacts;
    std::string tool_version;
    double wall_time_seconds = 0.0;
};
Json manifest_to_json(const RunManifest& manifest);

/// Writes via a temporary file and rename, so partially written artifacts
/// never appear under the final name.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mopul
