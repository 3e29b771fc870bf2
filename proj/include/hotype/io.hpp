#pragma once

#include <iosfwd>
#include <string>

#include "hotype/atoms.hpp"

namespace hotype {

// HOTYPE-SPACE v1: header block of "key value" lines, then one
// "weight coord..." line per point, then "end".
void write_space(std::ostream& os, const DiscreteSpace& space);
DiscreteSpace read_space(std::istream& is);
void save_space(const std::string& path, const DiscreteSpace& space);
DiscreteSpace load_space(const std::string& path);

/// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

// HOTYPE-FUNCTION v1: "index re im" rows keyed by point index.
void write_function(std::ostream& os, const DiscreteSpace& space, const DiscreteFunction& f);
DiscreteFunction read_function(std::istream& is, const DiscreteSpace& space);

// HOTYPE-REPORT v1
void write_report(std::ostream& os, const DiscreteSpace& space, const NormReport& rep);
NormReport read_report(std::istream& is, const DiscreteSpace& space);

// HOTYPE-ATOM v1; ensembles are atom-NNNN.txt files plus manifest.txt.
void write_atom(std::ostream& os, const DiscreteSpace& space, const Atom& a);
Atom read_atom(std::istream& is, const DiscreteSpace& space);
void save_ensemble(const std::string& dir, const DiscreteSpace& space, const Ensemble& ens);
Ensemble load_ensemble(const std::string& dir, const DiscreteSpace& space);

}  // namespace hotype
