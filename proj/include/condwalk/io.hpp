#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "condwalk/sampler.hpp"

namespace condwalk {

using Json = nlohmann::json;

/// Parse a model spec: {"family": "...", "dim": d, "params": {...}}. Errors
/// name the offending path and reason; unknown fields and non-continuous
/// families are rejected.
ModelPtr parse_model(const Json& j, const std::string& path = "model");
Json model_to_json(const CumulantModel& model);

/// Parse a conditioning spec:
/// {"mode": "sum"|"u", "n":, "k":, "target": [...], "model": {...}, "umap": {...}}.
/// `require_target` is dropped by callers that derive the target themselves
/// (the rare-event estimator).
ConditioningSpec parse_spec(const Json& j, bool require_target = true);

struct SpecFile {
  Json raw;
  ModelPtr model;
  UMapSpec umap;
  std::string mode;
  int n = 0;
  int k = 0;
  std::optional<Vector> target;
};

SpecFile parse_spec_file(const Json& j);
SpecFile load_spec_file(const std::string& path);

std::string trajectory_to_jsonl(const Trajectory& trajectory);
Trajectory trajectory_from_jsonl(const std::string& line, int expected_dim);

std::vector<Trajectory> read_trajectories(const std::string& path, int expected_dim);
void write_trajectories(const std::string& path, const std::vector<Trajectory>& batch);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Rejects keys outside `allowed`, reporting path and key.
void expect_keys(const Json& j, std::initializer_list<const char*> allowed,
                 const std::string& path);

}  // namespace condwalk
