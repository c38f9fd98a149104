#include "fapforge/relations.hpp"

#include <algorithm>

namespace fapforge {

bool ValueSpace::contains(const LineValue& v) const {
  if (v.set_valued) return universe > 0 && (v.set & ~full_mask()) == 0;
  if (v.scalar == kNull) return allow_null;
  return std::binary_search(values.begin(), values.end(), v.scalar);
}

namespace {

Mask rotate(Mask m, int step, int universe) {
  Mask out = 0;
  for (int e : mask_elements(m)) {
    const int shifted = ((e + step) % universe + universe) % universe;
    out |= Mask{1} << shifted;
  }
  return out;
}

LineValue checked(LineValue v, const ValueSpace& space, const Relation& relation) {
  if (!space.contains(v)) {
    throw RangeError(std::string(to_string(relation.kind)) + " completion leaves the domain");
  }
  return v;
}

void require_prefix(std::span<const LineValue> prefix, std::size_t n, const Relation& relation) {
  if (prefix.size() < n) {
    throw StructuralError(std::string(to_string(relation.kind)) + " needs a prefix of " +
                          std::to_string(n));
  }
}

LineValue complete_set(const Relation& relation, std::span<const LineValue> prefix,
                       const ValueSpace& space) {
  const Mask last = prefix.back().set;
  switch (relation.kind) {
    case RelationKind::constant:
      return checked(prefix.back(), space, relation);
    case RelationKind::progression:
      if (!space.cyclic) throw StructuralError("progression over sets needs a cyclic space");
      return checked(LineValue::of_set(rotate(last, relation.parameter, space.universe)), space,
                     relation);
    default:
      break;
  }
  require_prefix(prefix, 2, relation);
  const Mask a = prefix[prefix.size() - 2].set;
  const Mask b = last;
  Mask c = 0;
  switch (relation.kind) {
    case RelationKind::arithmetic:
      c = relation.parameter >= 0 ? (a | b) : (a & ~b);
      break;
    case RelationKind::union_:
      c = a | b;
      break;
    case RelationKind::intersection:
      c = a & b;
      break;
    case RelationKind::symmetric_difference:
      c = a ^ b;
      break;
    case RelationKind::set_subtraction:
      c = a & ~b;
      break;
    default:
      throw StructuralError("relation has no set completion");
  }
  return checked(LineValue::of_set(c), space, relation);
}

LineValue complete_scalar(const Relation& relation, std::span<const LineValue> prefix,
                          const ValueSpace& space) {
  const Value last = prefix.back().scalar;
  switch (relation.kind) {
    case RelationKind::constant:
      return checked(prefix.back(), space, relation);
    case RelationKind::progression:
      if (last == kNull) throw RangeError("progression from a null value");
      return checked(LineValue::of(last + relation.parameter), space, relation);
    case RelationKind::arithmetic: {
      require_prefix(prefix, 2, relation);
      const Value a = prefix[prefix.size() - 2].scalar;
      if (a == kNull || last == kNull) throw RangeError("arithmetic on a null value");
      const Value c = relation.parameter >= 0 ? a + last : a - last;
      return checked(LineValue::of(c), space, relation);
    }
    default:
      throw StructuralError(std::string(to_string(relation.kind)) +
                            " needs set-valued entries");
  }
}

}  // namespace

LineValue apply_relation(const Relation& relation, std::span<const LineValue> prefix,
                         const ValueSpace& space, std::span<const LineValue> governing) {
  if (prefix.empty()) throw StructuralError("empty prefix");
  for (const auto& v : prefix) {
    if (!space.contains(v) && !(v.scalar == kNull && relation.with_null)) {
      throw RangeError("prefix value outside the domain");
    }
  }
  if (relation.kind == RelationKind::distribution_of_three) {
    if (governing.size() != 3) throw StructuralError("distribution needs a governing triple");
    if (prefix.size() >= 3) throw StructuralError("distribution prefix longer than a line");
    std::vector<LineValue> remaining(governing.begin(), governing.end());
    for (const auto& v : prefix) {
      auto it = std::find(remaining.begin(), remaining.end(), v);
      if (it == remaining.end()) throw RangeError("prefix is not part of the governing triple");
      remaining.erase(it);
    }
    return remaining.front();
  }
  const bool sets = prefix.front().set_valued;
  if (is_set_relation(relation.kind) && !sets) {
    throw StructuralError(std::string(to_string(relation.kind)) + " needs set-valued entries");
  }
  return sets ? complete_set(relation, prefix, space) : complete_scalar(relation, prefix, space);
}

bool relation_holds(const Relation& relation, std::span<const LineValue> line,
                    const ValueSpace& space, std::span<const LineValue> governing) {
  if (line.size() < 2) return false;
  try {
    if (relation.kind == RelationKind::distribution_of_three) {
      if (line.size() != 3 || governing.size() != 3) return false;
      return std::is_permutation(line.begin(), line.end(), governing.begin(), governing.end());
    }
    for (const auto& v : line) {
      if (!space.contains(v)) return false;
    }
    if (relation_class(relation.kind) == RelationClass::unary) {
      for (std::size_t k = 1; k < line.size(); ++k) {
        if (apply_relation(relation, line.subspan(0, k), space) != line[k]) return false;
      }
      return true;
    }
    if (line.size() != 3) return false;
    return apply_relation(relation, line.subspan(0, 2), space) == line[2];
  } catch (const RangeError&) {
    return false;
  }
}

std::vector<std::vector<int>> grid_lines(const GridFormat& format, Direction direction) {
  const int rows = format.rows;
  const int cols = format.cols;
  std::vector<std::vector<int>> lines;
  switch (direction) {
    case Direction::row:
      for (int r = 0; r < rows; ++r) {
        std::vector<int> line;
        for (int c = 0; c < cols; ++c) line.push_back(r * cols + c);
        lines.push_back(std::move(line));
      }
      break;
    case Direction::column:
      for (int c = 0; c < cols; ++c) {
        std::vector<int> line;
        for (int r = 0; r < rows; ++r) line.push_back(r * cols + c);
        lines.push_back(std::move(line));
      }
      break;
    case Direction::main_diagonal:
    case Direction::secondary_diagonal: {
      if (rows != cols) throw StructuralError("diagonal directions need a square grid");
      const int n = rows;
      for (int k = 0; k < n; ++k) {
        std::vector<int> line;
        for (int r = 0; r < n; ++r) {
          const int c = direction == Direction::main_diagonal ? (r + k) % n
                                                              : ((k - r) % n + n) % n;
          line.push_back(r * n + c);
        }
        lines.push_back(std::move(line));
      }
      break;
    }
  }
  return lines;
}

int blank_line(const GridFormat& format, Direction direction) {
  const auto lines = grid_lines(format, direction);
  const int blank = format.cells() - 1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].back() == blank) return static_cast<int>(i);
  }
  throw StructuralError("blank cell is not last on any line");
}

PredicateClass unary_predicate(const Relation& relation, const ValueSpace& space) {
  if (relation_class(relation.kind) != RelationClass::unary) {
    throw StructuralError("not a unary relation");
  }
  PredicateClass p;
  p.cls = RelationClass::unary;
  p.relation = relation;
  p.accepts = [relation, space](std::span<const Value> line) {
    std::vector<LineValue> values;
    for (Value v : line) values.push_back(LineValue::of(v));
    return relation_holds(relation, values, space);
  };
  return p;
}

PredicateClass lift_to_binary(const PredicateClass& unary, const ValueSpace& space) {
  if (unary.cls != RelationClass::unary) throw StructuralError("lift_to_binary needs unary");
  // h(x, y) = f(y): the third entry depends on the first two through f.
  PredicateClass p;
  p.cls = RelationClass::binary;
  p.relation = unary.relation;
  const Relation relation = unary.relation;
  p.accepts = [relation, space](std::span<const Value> line) {
    if (line.size() != 3) return false;
    try {
      const LineValue y = LineValue::of(line[1]);
      return apply_relation(relation, std::span<const LineValue>(&y, 1), space) ==
             LineValue::of(line[2]);
    } catch (const Error&) {
      return false;
    }
  };
  return p;
}

PredicateClass lift_to_ternary(const PredicateClass& binary) {
  if (binary.cls != RelationClass::binary) throw StructuralError("lift_to_ternary needs binary");
  PredicateClass p;
  p.cls = RelationClass::ternary;
  p.relation = binary.relation;
  p.accepts = binary.accepts;  // P(x, y, z) := z == h(x, y)
  return p;
}

PredicateClass binary_predicate(const Relation& relation, const ValueSpace& space) {
  if (relation_class(relation.kind) != RelationClass::binary) {
    throw StructuralError("not a binary relation");
  }
  PredicateClass p;
  p.cls = RelationClass::binary;
  p.relation = relation;
  p.accepts = [relation, space](std::span<const Value> line) {
    std::vector<LineValue> values;
    for (Value v : line) values.push_back(LineValue::of(v));
    return relation_holds(relation, values, space);
  };
  return p;
}

}  // namespace fapforge
