#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fapforge/catalog.hpp"
#include "fapforge/item.hpp"

namespace fapforge {

// Choices of one answer set with the correct answer at index 0, before
// shuffling.
struct AnswerSet {
  std::vector<PanelSpec> choices;
  std::vector<std::pair<int, int>> history;  // (parent, child) modification edges
};

// A feature one atomic edit touches: an attribute of one entity, or the
// entity's presence (attribute -1).
struct EditKey {
  int component = 0;
  int key = 0;
  int attribute = -1;

  friend bool operator==(const EditKey&, const EditKey&) = default;
  friend auto operator<=>(const EditKey&, const EditKey&) = default;
};

struct SingleEdit {
  EditKey feature;
  PanelSpec result;
};

// Number of atomic edits separating two panels: differing entity attributes
// plus entities present in only one of them.
int panel_distance(const PanelSpec& a, const PanelSpec& b, const Configuration& config);

// Every panel one atomic edit away from `panel`.
std::vector<SingleEdit> single_edits(const PanelSpec& panel, const Catalog& cat,
                                     const Configuration& config);

AnswerSet gen_star(const ItemSpec& item, const Catalog& cat, std::uint64_t seed);
AnswerSet gen_impartial(const ItemSpec& item, const Catalog& cat, std::uint64_t seed);
AnswerSet gen_fair_tree(const ItemSpec& item, const Catalog& cat, std::uint64_t seed);
// letter in 'a'..'f'
AnswerSet gen_sandia(const ItemSpec& item, const Catalog& cat, char letter, std::uint64_t seed);
AnswerSet gen_imak(const ItemSpec& item, const Catalog& cat, std::uint64_t seed);

AnswerSet generate_answers(const ItemSpec& item, Strategy strategy, const Catalog& cat,
                           std::uint64_t seed);

// Generates, shuffles and stores the answer set on the item. Throws
// InfeasibleError when the strategy cannot be realized.
void attach_answers(ItemSpec& item, Strategy strategy, const Catalog& cat, std::uint64_t seed);

enum class Topology { star, three_regular, tree, other };
std::string_view to_string(Topology t);

struct AnswerGraph {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree;
  Topology topology = Topology::other;
  int center = -1;  // star center
};

AnswerGraph answer_graph(std::span<const PanelSpec> answers, const Configuration& config);

// Whether the edges form a tree over `vertices` vertices.
bool is_tree(int vertices, std::span<const std::pair<int, int>> edges);

enum class Heuristic { max_degree, max_similarity };
std::string_view to_string(Heuristic h);
Heuristic parse_heuristic(std::string_view name);

struct BlindChoice {
  int index = 0;          // lowest index among the best
  std::vector<int> tied;  // every index sharing the best score
};

BlindChoice context_blind_solve(std::span<const PanelSpec> answers, Heuristic heuristic,
                                const Configuration& config);

struct AuditReport {
  std::size_t items = 0;
  double accuracy = 0;  // expected credit, ties count 1/k
  std::size_t ties = 0;
  std::map<Topology, std::size_t> topology_counts;
  std::map<Topology, double> topology_accuracy;
};

// Expected credit of one item under the heuristic.
double blind_credit(const ItemSpec& item, Heuristic heuristic);

// Throws Error on an empty dataset.
AuditReport context_blind_audit(std::span<const ItemSpec> items, Heuristic heuristic);

}  // namespace fapforge
