#include "surfdist/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "surfdist/errors.hpp"

namespace surfdist {

using ordered_json = nlohmann::ordered_json;

namespace {

std::size_t line_at_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Line of the `occurrence`-th (0-based) appearance of "key", or 1.
std::size_t line_of_key(const std::string& text, const std::string& key, std::size_t occurrence = 0) {
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = 0;
  for (std::size_t k = 0;; ++k) {
    pos = text.find(quoted, pos);
    if (pos == std::string::npos) return 1;
    if (k == occurrence) return line_at_byte(text, pos);
    pos += quoted.size();
  }
}

[[noreturn]] void schema_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw SchemaError(source + ":" + std::to_string(line) + ": " + what);
}

ordered_json parse_document(const std::string& text, const std::string& source) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    schema_fail(source, line_at_byte(text, e.byte > 0 ? e.byte - 1 : 0), std::string("invalid JSON: ") + e.what());
  }
}

ZyxTriple read_triple(const ordered_json& obj, const char* key, const std::string& text, const std::string& source,
                      std::size_t occurrence) {
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const auto& e) { return e.is_number(); }))
    schema_fail(source, line_of_key(text, key, occurrence), std::string("'") + key + "' must be an array of 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void require(const ordered_json& obj, std::initializer_list<const char*> keys, const std::string& source,
             std::size_t line) {
  for (const char* k : keys)
    if (!obj.contains(k)) schema_fail(source, line, std::string("missing field '") + k + "'");
}

ordered_json instance_fields(const InstanceShape& shape) {
  const auto& spec = shape.lattice->spec;
  ordered_json j;
  j["version"] = 1;
  j["rays"] = spec.rays;
  j["kind"] = to_string(spec.kind);
  j["anisotropy"] = to_zyx(spec.anisotropy);
  j["center"] = to_zyx(shape.center);
  j["distances"] = shape.distances;
  return j;
}

// `occurrence` picks which repetition of each key to report for multi-instance documents.
InstanceShape instance_from_object(const ordered_json& j, const std::string& text, const std::string& source,
                                   std::size_t occurrence, std::size_t object_line) {
  if (!j.is_object()) schema_fail(source, object_line, "expected a JSON object");
  require(j, {"version", "rays", "kind", "center", "distances"}, source, object_line);
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
    schema_fail(source, line_of_key(text, "version", occurrence), "unsupported version (expected 1)");
  if (!j.at("rays").is_number_integer())
    schema_fail(source, line_of_key(text, "rays", occurrence), "'rays' must be an integer");
  if (!j.at("kind").is_string())
    schema_fail(source, line_of_key(text, "kind", occurrence), "'kind' must be a string");

  LatticeSpec spec;
  spec.rays = j.at("rays").get<int>();
  try {
    spec.kind = parse_lattice_kind(j.at("kind").get<std::string>());
  } catch (const InvalidArgument& e) {
    schema_fail(source, line_of_key(text, "kind", occurrence), e.what());
  }
  if (j.contains("anisotropy")) spec.anisotropy = from_zyx(read_triple(j, "anisotropy", text, source, occurrence));
  const Vec3 center = from_zyx(read_triple(j, "center", text, source, occurrence));

  const auto& dj = j.at("distances");
  if (!dj.is_array() || !std::all_of(dj.begin(), dj.end(), [](const auto& e) { return e.is_number(); }))
    schema_fail(source, line_of_key(text, "distances", occurrence), "'distances' must be an array of numbers");
  std::vector<double> distances = dj.get<std::vector<double>>();

  std::shared_ptr<const Lattice> lattice;
  try {
    lattice = make_lattice(spec);
  } catch (const InvalidArgument& e) {
    schema_fail(source, line_of_key(text, "rays", occurrence), e.what());
  }
  try {
    return InstanceShape(lattice, center, std::move(distances));
  } catch (const InvalidArgument& e) {
    schema_fail(source, line_of_key(text, "distances", occurrence), e.what());
  }
}

}  // namespace

std::string instance_to_json(const InstanceShape& shape) { return instance_fields(shape).dump(2) + "\n"; }

InstanceShape instance_from_json(const std::string& text, const std::string& source) {
  const auto j = parse_document(text, source);
  return instance_from_object(j, text, source, 0, 1);
}

std::string candidates_to_json(const std::vector<Candidate>& candidates) {
  ordered_json j;
  j["version"] = 1;
  j["candidates"] = ordered_json::array();
  for (const auto& c : candidates) {
    auto item = instance_fields(c.shape);
    item["probability"] = c.probability;
    j["candidates"].push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

std::vector<Candidate> candidates_from_json(const std::string& text, const std::string& source) {
  const auto j = parse_document(text, source);
  if (!j.is_object() || !j.contains("candidates") || !j.at("candidates").is_array())
    schema_fail(source, line_of_key(text, "candidates"), "expected an object with a 'candidates' array");
  std::vector<Candidate> out;
  std::size_t index = 0;
  for (const auto& item : j.at("candidates")) {
    const std::size_t line = line_of_key(text, "rays", index);
    InstanceShape shape = instance_from_object(item, text, source, index, line);
    if (!item.contains("probability") || !item.at("probability").is_number())
      schema_fail(source, line, "candidate " + std::to_string(index) + " needs a numeric 'probability'");
    const double p = item.at("probability").get<double>();
    if (!(p >= 0.0 && p <= 1.0))
      schema_fail(source, line_of_key(text, "probability", index), "probability must lie in [0, 1]");
    out.push_back({std::move(shape), p});
    ++index;
  }
  return out;
}

std::string lattice_to_json(const Lattice& lattice) {
  ordered_json j;
  j["rays"] = lattice.spec.rays;
  j["kind"] = to_string(lattice.spec.kind);
  j["anisotropy"] = to_zyx(lattice.spec.anisotropy);
  j["vertices"] = ordered_json::array();
  for (const auto& d : lattice.directions.directions) j["vertices"].push_back(to_zyx(d));
  j["edges"] = lattice.topology.edges;
  j["triangles"] = lattice.topology.triangles;
  j["counts"] = {{"vertices", lattice.topology.vertex_count},
                 {"edges", lattice.topology.edges.size()},
                 {"triangles", lattice.topology.triangles.size()},
                 {"control_points", lattice.layout.size()}};
  j["control_layout"] = ordered_json::array();
  for (const auto& e : lattice.layout.entries) {
    ordered_json item;
    switch (e.role) {
      case ControlRole::vertex:
        item["role"] = "vertex";
        item["vertex"] = e.owner;
        break;
      case ControlRole::edge:
        item["role"] = "edge";
        item["edge"] = e.owner;
        item["third"] = e.third;
        break;
      case ControlRole::interior:
        item["role"] = "interior";
        item["triangle"] = e.owner;
        break;
    }
    item["direction"] = to_zyx(e.direction);
    j["control_layout"].push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace surfdist
