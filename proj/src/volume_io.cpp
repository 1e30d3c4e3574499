#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "surfdist/errors.hpp"
#include "surfdist/volume.hpp"

namespace surfdist {

VoxelIndex Grid::index_of(std::size_t off) const {
  const std::size_t x = off % nx;
  const std::size_t y = (off / nx) % ny;
  const std::size_t z = off / (nx * ny);
  return {static_cast<long>(z), static_cast<long>(y), static_cast<long>(x)};
}

bool Grid::contains(const VoxelIndex& v) const {
  return v.z >= 0 && v.y >= 0 && v.x >= 0 && v.z < static_cast<long>(nz) && v.y < static_cast<long>(ny) &&
         v.x < static_cast<long>(nx);
}

Vec3 Grid::world(const VoxelIndex& v) const {
  return {static_cast<double>(v.x) * anisotropy.x, static_cast<double>(v.y) * anisotropy.y,
          static_cast<double>(v.z) * anisotropy.z};
}

VoxelIndex Grid::voxel_at(const Vec3& p) const {
  return {static_cast<long>(std::floor(p.z / anisotropy.z + 0.5)), static_cast<long>(std::floor(p.y / anisotropy.y + 0.5)),
          static_cast<long>(std::floor(p.x / anisotropy.x + 0.5))};
}

double Grid::min_spacing() const { return std::min({anisotropy.x, anisotropy.y, anisotropy.z}); }

void Grid::validate() const {
  if (nz < 1 || ny < 1 || nx < 1) throw InvalidArgument("volume dimensions must be at least 1");
  for (double a : {anisotropy.x, anisotropy.y, anisotropy.z})
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("anisotropy components must be finite and positive");
}

std::string to_string(Dtype dtype) {
  switch (dtype) {
    case Dtype::u8:
      return "u8";
    case Dtype::u16:
      return "u16";
    case Dtype::u32:
      return "u32";
  }
  return "u32";
}

Dtype parse_dtype(const std::string& s) {
  if (s == "u8") return Dtype::u8;
  if (s == "u16") return Dtype::u16;
  if (s == "u32") return Dtype::u32;
  throw FormatError("unsupported dtype '" + s + "' (expected u8, u16 or u32)");
}

std::uint32_t dtype_max(Dtype dtype) {
  switch (dtype) {
    case Dtype::u8:
      return 0xffu;
    case Dtype::u16:
      return 0xffffu;
    case Dtype::u32:
      return 0xffffffffu;
  }
  return 0xffffffffu;
}

namespace {

std::size_t dtype_bytes(Dtype dtype) { return dtype == Dtype::u8 ? 1 : dtype == Dtype::u16 ? 2 : 4; }

std::string base_path(const std::string& path) {
  for (const char* ext : {".json", ".raw"}) {
    const std::string e(ext);
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
      return path.substr(0, path.size() - e.size());
  }
  return path;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

LabelVolume::LabelVolume(const Grid& grid_, Dtype dtype_) : grid(grid_), labels(grid_.size(), 0), dtype(dtype_) {
  grid.validate();
}

std::vector<std::uint32_t> LabelVolume::instance_ids() const {
  std::set<std::uint32_t> ids;
  for (auto l : labels)
    if (l != 0) ids.insert(l);
  return {ids.begin(), ids.end()};
}

void save_volume(const LabelVolume& vol, const std::string& path) {
  vol.grid.validate();
  if (vol.labels.size() != vol.grid.size()) throw InvalidArgument("label count does not match volume shape");
  const std::uint32_t limit = dtype_max(vol.dtype);
  const auto max_label = vol.labels.empty() ? 0u : *std::max_element(vol.labels.begin(), vol.labels.end());
  if (max_label > limit)
    throw InvalidArgument("label exceeds dtype: " + std::to_string(max_label) + " does not fit " + to_string(vol.dtype));

  const std::string base = base_path(path);
  nlohmann::ordered_json header;
  header["shape"] = {vol.grid.nz, vol.grid.ny, vol.grid.nx};
  header["dtype"] = to_string(vol.dtype);
  header["order"] = "zyx-C";
  header["anisotropy"] = {vol.grid.anisotropy.z, vol.grid.anisotropy.y, vol.grid.anisotropy.x};

  const std::size_t width = dtype_bytes(vol.dtype);
  std::string payload(vol.labels.size() * width, '\0');
  for (std::size_t i = 0; i < vol.labels.size(); ++i)
    for (std::size_t b = 0; b < width; ++b)
      payload[i * width + b] = static_cast<char>((vol.labels[i] >> (8 * b)) & 0xffu);

  write_file(base + ".json", header.dump(2) + "\n");
  write_file(base + ".raw", payload);
}

LabelVolume load_volume(const std::string& path) {
  const std::string base = base_path(path);
  const std::string text = read_file(base + ".json");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(base + ".json: malformed header: " + e.what());
  }

  LabelVolume vol;
  try {
    const auto shape = header.at("shape").get<std::vector<long>>();
    if (shape.size() != 3 || shape[0] < 1 || shape[1] < 1 || shape[2] < 1)
      throw FormatError(base + ".json: shape must hold three positive extents");
    if (header.contains("order") && header.at("order").get<std::string>() != "zyx-C")
      throw FormatError(base + ".json: unsupported order '" + header.at("order").get<std::string>() + "'");
    vol.dtype = parse_dtype(header.at("dtype").get<std::string>());
    vol.grid.nz = static_cast<std::size_t>(shape[0]);
    vol.grid.ny = static_cast<std::size_t>(shape[1]);
    vol.grid.nx = static_cast<std::size_t>(shape[2]);
    if (header.contains("anisotropy")) {
      const auto a = header.at("anisotropy").get<std::vector<double>>();
      if (a.size() != 3) throw FormatError(base + ".json: anisotropy must hold three values");
      vol.grid.anisotropy = from_zyx({a[0], a[1], a[2]});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(base + ".json: malformed header: " + e.what());
  }
  try {
    vol.grid.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(base + ".json: " + e.what());
  }

  const std::string payload = read_file(base + ".raw");
  const std::size_t width = dtype_bytes(vol.dtype);
  if (payload.size() != vol.grid.size() * width)
    throw FormatError(base + ".raw: payload holds " + std::to_string(payload.size()) + " bytes, header implies " +
                      std::to_string(vol.grid.size() * width));
  vol.labels.resize(vol.grid.size());
  for (std::size_t i = 0; i < vol.labels.size(); ++i) {
    std::uint32_t v = 0;
    for (std::size_t b = 0; b < width; ++b)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[i * width + b])) << (8 * b);
    vol.labels[i] = v;
  }
  return vol;
}

}  // namespace surfdist
