#pragma once

#include "rbiga/config.hpp"
#include "rbiga/greedy.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rbiga {

/// A reduced model plus what is needed to rebuild fields on the truth mesh.
///
/// File layout (all integers and doubles little-endian):
///   8 bytes   magic "RBIGA01\0"
///   u64       length of the JSON header, then the header text (UTF-8)
///   u64       number of matrix blocks, then per block:
///             u32 name length, name, u64 rows, u64 cols, rows*cols f64 column-major
/// The header holds counts, coefficient-function strings, flags and the greedy
/// history (without timings); every floating-point array lives in a block.
struct ReducedModelArchive {
  std::string case_name;
  int level = 0;
  GreedySettings settings;
  OnlineModel model;
  GreedyHistory history;
  Eigen::MatrixXd basis;         ///< Z on the free DOFs
  std::vector<int> free_dofs;    ///< free index -> global control variable
  int dof_count = 0;
  std::vector<std::vector<double>> samples;
};

std::string serialize_archive(const ReducedModelArchive& a);
ReducedModelArchive deserialize_archive(const std::string& bytes);
void save_archive(const std::filesystem::path& path, const ReducedModelArchive& a);
ReducedModelArchive load_archive(const std::filesystem::path& path);

nlohmann::json history_to_json(const GreedyHistory& h);
GreedyHistory history_from_json(const nlohmann::json& j);

} // namespace rbiga
