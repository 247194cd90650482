#include "chanstab/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "chanstab/error.hpp"

namespace chanstab {

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("snapshot: truncated file");
  return to_little(v);
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& f, const std::string& name) {
  const auto& g = f.grid();
  nlohmann::json header = {{"L", g.L}, {"H", g.H}, {"N1", g.n1}, {"N2", g.n2}, {"name", name}};
  const std::string text = header.dump();
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : f.values()) put<double>(os, v);
  if (!os) throw Error("snapshot: write failed");
}

void write_snapshot(const std::filesystem::path& path, const Field& f, const std::string& name) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("snapshot: cannot open " + path.string());
  write_snapshot(os, f, name);
}

Snapshot read_snapshot(std::istream& is) {
  const auto len = get<std::uint64_t>(is);
  if (len > (1u << 20)) throw Error("snapshot: implausible header length");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw Error("snapshot: truncated header");
  const auto header = nlohmann::json::parse(text);
  GridSpec grid(header.at("L").get<double>(), header.at("H").get<double>(),
                header.at("N1").get<int>(), header.at("N2").get<int>());
  std::vector<double> values(grid.size());
  for (double& v : values) v = get<double>(is);
  return {Field(grid, std::move(values)), header.value("name", std::string{})};
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("snapshot: cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace chanstab
