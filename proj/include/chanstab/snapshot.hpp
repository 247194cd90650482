#pragma once

// Field snapshot file:
//   u64 little-endian  header length n
//   n bytes            JSON header {"L","H","N1","N2","name"}
//   N1*N2 f64 LE       values, row-major with i fastest

#include <filesystem>
#include <iosfwd>
#include <string>

#include "chanstab/grid.hpp"

namespace chanstab {

struct Snapshot {
  Field field;
  std::string name;
};

void write_snapshot(std::ostream& os, const Field& f, const std::string& name);
void write_snapshot(const std::filesystem::path& path, const Field& f, const std::string& name);
Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace chanstab
