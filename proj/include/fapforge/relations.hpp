#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fapforge/item.hpp"
#include "fapforge/types.hpp"

namespace fapforge {

// The values a line entry may take.
struct ValueSpace {
  std::vector<Value> values;  // scalar domain, ascending (counts for number)
  int universe = 0;           // element count for set-valued entries
  bool cyclic = false;        // progression rotates sets (positions)
  bool allow_null = false;    // distribution-of-two sentinel

  static ValueSpace scalar(std::vector<Value> values) {
    ValueSpace s;
    s.values = std::move(values);
    return s;
  }
  static ValueSpace sets(int universe, bool cyclic = false) {
    ValueSpace s;
    s.universe = universe;
    s.cyclic = cyclic;
    return s;
  }
  bool contains(const LineValue& v) const;
  Mask full_mask() const { return universe >= 64 ? ~Mask{0} : (Mask{1} << universe) - 1; }
};

// Completes a line from its prefix. Unary relations read the last prefix
// entry, binary relations the first two; distribution-of-three returns the
// member of `governing` missing from the prefix. Throws RangeError when the
// completion leaves the space, StructuralError on arity or kind mismatch.
LineValue apply_relation(const Relation& relation, std::span<const LineValue> prefix,
                         const ValueSpace& space, std::span<const LineValue> governing = {});

// Whether a complete line satisfies the relation.
bool relation_holds(const Relation& relation, std::span<const LineValue> line,
                    const ValueSpace& space, std::span<const LineValue> governing = {});

// Cell indices (row-major) of each line along `direction`, each ordered so
// that the bottom-right cell is the last entry of its line.
std::vector<std::vector<int>> grid_lines(const GridFormat& format, Direction direction);

// Index of the line containing the last cell.
int blank_line(const GridFormat& format, Direction direction);

// Class-level predicates over a single line, used to state the
// unary ⊂ binary ⊂ ternary chain. A unary predicate maps each entry to the
// next, a binary one maps the first two entries to the third, and a ternary
// one is an arbitrary acceptance test over the three entries.
struct PredicateClass {
  RelationClass cls = RelationClass::unary;
  Relation relation;  // the catalog relation this instance was lifted from
  std::function<bool(std::span<const Value>)> accepts;
};

PredicateClass unary_predicate(const Relation& relation, const ValueSpace& space);
PredicateClass lift_to_binary(const PredicateClass& unary, const ValueSpace& space);
PredicateClass lift_to_ternary(const PredicateClass& binary);
PredicateClass binary_predicate(const Relation& relation, const ValueSpace& space);

}  // namespace fapforge
