#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coda/env/software.hpp"

namespace coda::env {

// The simulated applications available to a run plus the task templates the
// generator may draw from. At most kMaxSoftware applications; the position of
// an application in the catalog is its feature slot in the planner.
class Catalog {
 public:
  static constexpr int kMaxSoftware = 4;

  Catalog() = default;
  Catalog(std::vector<SoftwareModel> models, std::vector<std::string> templates);

  // algebra, biochem, gis and astron, with every built-in template.
  static const Catalog& builtin();

  static Catalog from_json(const nlohmann::json& j);
  static Catalog load(const std::string& path);
  nlohmann::json to_json() const;

  const SoftwareModel& model(const std::string& name) const;
  int slot(const std::string& name) const;
  std::vector<std::string> names() const;
  const std::vector<std::string>& templates() const { return templates_; }

 private:
  std::vector<std::shared_ptr<const SoftwareModel>> models_;
  std::vector<std::string> templates_;
};

nlohmann::json model_to_json(const SoftwareModel& m);
SoftwareModel model_from_json(const nlohmann::json& j);

}  // namespace coda::env
