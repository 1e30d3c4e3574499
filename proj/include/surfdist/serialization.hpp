#pragma once

#include <string>
#include <vector>

#include "surfdist/instance_model.hpp"
#include "surfdist/matching.hpp"

namespace surfdist {

// Thrown for documents that parse as JSON but violate the schema, or fail to
// parse. The message starts with `<source>:<line>:`.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"version":1, "rays":V, "kind":"canonical"|"fibonacci", "anisotropy":[az,ay,ax],
//  "center":[z,y,x], "distances":[... 9V-16 values in layout order ...]}
std::string instance_to_json(const InstanceShape& shape);
InstanceShape instance_from_json(const std::string& text, const std::string& source = "<instance>");

// {"version":1, "candidates":[{<instance fields>, "probability":p}, ...]}
std::string candidates_to_json(const std::vector<Candidate>& candidates);
std::vector<Candidate> candidates_from_json(const std::string& text, const std::string& source = "<candidates>");

// Topology and control layout of a lattice, as emitted by `surfdist lattice`.
std::string lattice_to_json(const Lattice& lattice);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace surfdist
