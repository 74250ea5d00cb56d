#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "salp/structures.hpp"
#include "salp/tensors.hpp"

namespace salp {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

/// Line-based structure file format:
///   structure <name>
///   domain <n>
///   relation <name> <arity> [full]
///     t <e1> <e2> ... <er>
/// '#' starts a comment; entries are 1-based.
Structure parse_structure(const std::string& text);
std::string serialize_structure(const Structure& s);

Structure load_structure_file(const std::string& path);

/// Tensor dump: one line `<i1> ... <ik> <p>/<q>` per nonzero, sorted by
/// encoded index; rationals reduced with positive denominator.
std::string dump_tensor(const CubicalTensor& t);
CubicalTensor parse_tensor_block(const std::string& text, int base, int order);

/// FNV-1a content hash of the canonical serialization; keys witness files
/// to the structures they were produced from.
std::uint64_t content_hash(const Structure& s);
std::string hash_hex(std::uint64_t h);

}  // namespace salp
