#include "polydiff/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "polydiff/errors.hpp"

namespace polydiff {

namespace {

using nlohmann::json;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

json space_to_json(const Space& s) {
  if (s.is_finite()) return {{"type", "finite"}, {"d", s.size()}};
  return {{"type", "grid"}, {"x_min", s.x_min()}, {"x_max", s.x_max()}, {"n", s.size()}};
}

Space space_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "finite") return Space::finite(j.at("d").get<std::size_t>());
  if (type == "grid")
    return Space::grid(j.at("x_min").get<double>(), j.at("x_max").get<double>(), j.at("n").get<std::size_t>());
  throw ArgumentError("unknown space type '" + type + "'");
}

static_assert(std::endian::native == std::endian::little, "tensor binary format assumes a little-endian host");

}  // namespace

void write_tensor(const CoefficientTensor& g, const std::filesystem::path& stem) {
  json header{{"space", space_to_json(g.space())},
              {"k", g.degree()},
              {"shape", std::vector<std::size_t>(g.degree(), g.space().size())},
              {"dtype", "float64-le"}};
  std::ofstream hj(with_suffix(stem, ".json"));
  if (!hj) throw ArgumentError("cannot write " + with_suffix(stem, ".json").string());
  hj << header.dump(2) << '\n';

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw ArgumentError("cannot write " + with_suffix(stem, ".bin").string());
  bin.write(reinterpret_cast<const char*>(g.values().data()),
            static_cast<std::streamsize>(g.values().size() * sizeof(double)));
}

CoefficientTensor read_tensor(const std::filesystem::path& stem) {
  std::ifstream hj(with_suffix(stem, ".json"));
  if (!hj) throw ArgumentError("cannot read " + with_suffix(stem, ".json").string());
  const json header = json::parse(hj);
  const Space space = space_from_json(header.at("space"));
  const auto k = header.at("k").get<std::size_t>();

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary | std::ios::ate);
  if (!bin) throw ArgumentError("cannot read " + with_suffix(stem, ".bin").string());
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  if (bytes % sizeof(double) != 0) throw ArgumentError("tensor binary block has a partial value");
  std::vector<double> values(bytes / sizeof(double));
  bin.seekg(0);
  bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  return CoefficientTensor(space, k, std::move(values));
}

void write_tensor_csv(const CoefficientTensor& g, const std::filesystem::path& path) {
  if (g.degree() > 2) throw ArgumentError("CSV export supports k <= 2");
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << std::setprecision(17);
  const auto& s = g.space();
  const std::size_t n = s.size();
  switch (g.degree()) {
    case 0:
      out << "value\n" << g[0] << '\n';
      break;
    case 1:
      out << "x,value\n";
      for (std::size_t i = 0; i < n; ++i) out << s.node(i) << ',' << g[i] << '\n';
      break;
    default:
      out << "x,y,value\n";
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out << s.node(i) << ',' << s.node(j) << ',' << g[i * n + j] << '\n';
  }
}

}  // namespace polydiff
