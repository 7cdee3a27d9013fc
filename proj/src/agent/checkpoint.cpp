#include "coda/agent/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace coda::agent {

namespace {
constexpr const char* kMagic = "coda-planner-checkpoint 1";
}

std::string checkpoint_to_string(const PlannerParams& params) {
  std::ostringstream out;
  out << kMagic << '\n'
      << "feature_map " << kFeatureMapVersion << '\n'
      << "version " << params.version << '\n'
      << "dim " << params.theta.size() << '\n';
  char buf[40];
  for (double v : params.theta) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
  return out.str();
}

PlannerParams checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw CheckpointError("not a planner checkpoint");
  std::string key, fmap, version;
  std::size_t dim = 0;
  if (!(in >> key >> fmap) || key != "feature_map") throw CheckpointError("missing feature_map");
  if (fmap != kFeatureMapVersion) {
    throw CheckpointError("checkpoint feature map " + fmap + " does not match " + kFeatureMapVersion);
  }
  if (!(in >> key >> version) || key != "version") throw CheckpointError("missing version");
  if (!(in >> key >> dim) || key != "dim") throw CheckpointError("missing dim");
  if (dim != static_cast<std::size_t>(kFeatureDim)) throw CheckpointError("dimension mismatch");
  PlannerParams p;
  p.version = version;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(in >> p.theta[i])) throw CheckpointError("truncated weights");
  }
  if (!p.finite()) throw CheckpointError("non-finite weight");
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const PlannerParams& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out << checkpoint_to_string(params);
  }
  std::filesystem::rename(tmp, path);
}

PlannerParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace coda::agent
