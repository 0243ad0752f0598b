#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socratic/embedding.hpp"

namespace socratic {

// SMEB embedding corpus file:
//   magic "SMEB" | u32 LE version=1 | u32 LE dim | u64 LE count
//   count*dim float32 LE row-major
//   optional: u64 LE byte length | UTF-8 JSON array of ids
struct SmebFile {
    Mat rows;
    std::optional<std::vector<std::string>> ids;
};

void smeb_write(const std::string& path, const Eigen::Ref<const Mat>& rows,
                const std::vector<std::string>* ids = nullptr);

SmebFile smeb_read(const std::string& path);

}  // namespace socratic
