#include "fapforge/distractors.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include "fapforge/rng.hpp"
#include "fapforge/validator.hpp"

namespace fapforge {

namespace {

constexpr int kChoices = 8;
constexpr int kTries = 400;

// One atomic edit, replayable on any panel holding the touched entity.
struct Op {
  EditKey feature;
  Value value = 0;  // new attribute value
  Entity added;     // entity inserted by a presence edit on an absent key
  bool add = false;
};

int key_of(const Entity& e, const Configuration& config) {
  return entity_key(e, config.components[static_cast<std::size_t>(e.component)]);
}

bool editable(AttributeId a, const Component& comp, const Catalog& cat) {
  if (!cat.has_attribute(a, comp.name)) return false;
  if (a == AttributeId::type && (comp.overlay || comp.fixed_type != kNull)) return false;
  return cat.domain(a, comp.name).size() >= 2;
}

std::vector<Op> edit_ops(const PanelSpec& panel, const Catalog& cat, const Configuration& config) {
  std::vector<Op> ops;
  for (std::size_t ci = 0; ci < config.components.size(); ++ci) {
    const int c = static_cast<int>(ci);
    const auto& comp = config.components[ci];
    const auto members = panel.in_component(c);
    std::set<int> present;
    for (const auto& e : members) {
      const int key = key_of(e, config);
      present.insert(key);
      for (int ai = 0; ai < kEntityAttributeCount; ++ai) {
        const auto a = static_cast<AttributeId>(ai);
        if (!editable(a, comp, cat)) continue;
        for (Value v : cat.domain(a, comp.name).values) {
          if (v == e.get(a)) continue;
          Op op;
          op.feature = EditKey{c, key, ai};
          op.value = v;
          ops.push_back(op);
        }
      }
      Op remove;
      remove.feature = EditKey{c, key, -1};
      ops.push_back(remove);
    }
    Entity templ;
    templ.component = c;
    if (!members.empty()) {
      templ = members.front();
    } else if (comp.fixed_type != kNull) {
      templ.set(AttributeId::type, comp.fixed_type);
    }
    const int keys = comp.overlay ? cat.domain(AttributeId::type, comp.name).size()
                                  : static_cast<int>(comp.slots.size());
    if (comp.overlay && comp.fixed_type != kNull) continue;
    for (int key = 0; key < keys; ++key) {
      if (present.count(key) != 0) continue;
      Op add;
      add.feature = EditKey{c, key, -1};
      add.add = true;
      add.added = templ;
      add.added.component = c;
      if (comp.overlay) {
        add.added.slot = 0;
        add.added.set(AttributeId::type, key);
      } else {
        add.added.slot = key;
      }
      ops.push_back(add);
    }
  }
  return ops;
}

// Applies the op; returns false when the touched entity is not where the op
// expects it.
bool apply(PanelSpec& panel, const Op& op, const Configuration& config) {
  auto it = std::find_if(panel.entities.begin(), panel.entities.end(), [&](const Entity& e) {
    return e.component == op.feature.component && key_of(e, config) == op.feature.key;
  });
  if (op.feature.attribute >= 0) {
    if (it == panel.entities.end()) return false;
    it->set(static_cast<AttributeId>(op.feature.attribute), op.value);
  } else if (op.add) {
    if (it != panel.entities.end()) return false;
    panel.entities.push_back(op.added);
  } else {
    if (it == panel.entities.end()) return false;
    panel.entities.erase(it);
  }
  panel.canonicalize();
  return true;
}

bool conflicts(const EditKey& a, const EditKey& b) {
  if (a.component != b.component || a.key != b.key) return false;
  return a.attribute == -1 || b.attribute == -1 || a.attribute == b.attribute;
}

bool contains(const std::vector<PanelSpec>& panels, const PanelSpec& p) {
  return std::find(panels.begin(), panels.end(), p) != panels.end();
}

struct Context {
  const ItemSpec& item;
  const Catalog& cat;
  const Configuration& config;

  // A usable distractor: new, and not a second valid completion.
  bool acceptable(const PanelSpec& p, const std::vector<PanelSpec>& chosen) const {
    return !contains(chosen, p) && p != item.correct && !completes_validly(item, p, cat);
  }
};

Context make_context(const ItemSpec& item, const Catalog& cat) {
  return Context{item, cat, cat.configuration(item.configuration)};
}

// Grows a set by editing members: `parent_pool` returns the indices eligible
// as parents given the current size.
template <typename ParentPool>
AnswerSet grow(const Context& ctx, Rng& rng, ParentPool parent_pool, const char* name) {
  AnswerSet out;
  out.choices.push_back(ctx.item.correct);
  while (static_cast<int>(out.choices.size()) < kChoices) {
    bool grown = false;
    for (int tries = 0; tries < kTries && !grown; ++tries) {
      const auto parents = parent_pool(static_cast<int>(out.choices.size()));
      const int parent = rng.pick(parents);
      const auto ops = edit_ops(out.choices[static_cast<std::size_t>(parent)], ctx.cat, ctx.config);
      if (ops.empty()) continue;
      PanelSpec child = out.choices[static_cast<std::size_t>(parent)];
      if (!apply(child, rng.pick(ops), ctx.config)) continue;
      if (!ctx.acceptable(child, out.choices)) continue;
      out.history.emplace_back(parent, static_cast<int>(out.choices.size()));
      out.choices.push_back(std::move(child));
      grown = true;
    }
    if (!grown) throw InfeasibleError(std::string(name) + ": attempt budget exhausted");
  }
  return out;
}

// Value a (component, attribute) feature takes in a panel.
Value read_feature(const PanelSpec& panel, const Feature& f) {
  const auto members = panel.in_component(f.component);
  if (members.empty()) throw InfeasibleError("feature component is empty");
  if (f.attribute == AttributeId::position) {
    if (members.size() != 1) throw InfeasibleError("position feature needs a single entity");
    return members.front().slot;
  }
  return members.front().get(f.attribute);
}

void write_feature(PanelSpec& panel, const Feature& f, Value v) {
  for (auto& e : panel.entities) {
    if (e.component != f.component) continue;
    if (f.attribute == AttributeId::position) {
      e.slot = v;
    } else {
      e.set(f.attribute, v);
    }
  }
  panel.canonicalize();
}

std::vector<Value> feature_values(const Feature& f, const Catalog& cat,
                                  const Configuration& config) {
  const auto& comp = config.components[static_cast<std::size_t>(f.component)];
  if (f.attribute == AttributeId::position) {
    std::vector<Value> v(comp.slots.size());
    std::iota(v.begin(), v.end(), 0);
    return v;
  }
  return cat.domain(f.attribute, comp.name).values;
}

}  // namespace

int panel_distance(const PanelSpec& a, const PanelSpec& b, const Configuration& config) {
  int d = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  auto key = [&](const Entity& e) { return std::make_pair(e.component, key_of(e, config)); };
  while (i < a.entities.size() || j < b.entities.size()) {
    if (j == b.entities.size() || (i < a.entities.size() && key(a.entities[i]) < key(b.entities[j]))) {
      ++d;
      ++i;
    } else if (i == a.entities.size() || key(b.entities[j]) < key(a.entities[i])) {
      ++d;
      ++j;
    } else {
      const auto& x = a.entities[i];
      const auto& y = b.entities[j];
      const bool overlay = config.components[static_cast<std::size_t>(x.component)].overlay;
      for (int k = overlay ? 1 : 0; k < kEntityAttributeCount; ++k) {
        if (x.attrs[static_cast<std::size_t>(k)] != y.attrs[static_cast<std::size_t>(k)]) ++d;
      }
      ++i;
      ++j;
    }
  }
  return d;
}

std::vector<SingleEdit> single_edits(const PanelSpec& panel, const Catalog& cat,
                                     const Configuration& config) {
  std::vector<SingleEdit> out;
  for (const auto& op : edit_ops(panel, cat, config)) {
    PanelSpec p = panel;
    if (apply(p, op, config)) out.push_back(SingleEdit{op.feature, std::move(p)});
  }
  return out;
}

AnswerSet gen_star(const ItemSpec& item, const Catalog& cat, std::uint64_t seed) {
  const Context ctx = make_context(item, cat);
  Rng rng(seed);
  auto ops = edit_ops(item.correct, cat, ctx.config);
  rng.shuffle(ops);
  // Attribute edits first: presence edits block every attribute of their key.
  std::stable_partition(ops.begin(), ops.end(), [](const Op& op) { return op.feature.attribute >= 0; });

  AnswerSet out;
  out.choices.push_back(item.correct);
  std::vector<EditKey> used;
  for (const auto& op : ops) {
    if (static_cast<int>(out.choices.size()) == kChoices) break;
    if (std::any_of(used.begin(), used.end(),
                    [&](const EditKey& k) { return conflicts(k, op.feature); })) {
      continue;
    }
    PanelSpec leaf = item.correct;
    if (!apply(leaf, op, ctx.config) || !ctx.acceptable(leaf, out.choices)) continue;
    used.push_back(op.feature);
    out.history.emplace_back(0, static_cast<int>(out.choices.size()));
    out.choices.push_back(std::move(leaf));
  }
  if (static_cast<int>(out.choices.size()) < kChoices) {
    throw InfeasibleError("star: fewer than 7 independent single-attribute modifications");
  }
  return out;
}

AnswerSet gen_impartial(const ItemSpec& item, const Catalog& cat, std::uint64_t seed) {
  const Context ctx = make_context(item, cat);
  Rng rng(seed);
  const auto ops = edit_ops(item.correct, cat, ctx.config);
  for (int tries = 0; tries < kTries; ++tries) {
    std::vector<Op> axes;
    auto pool = ops;
    rng.shuffle(pool);
    for (const auto& op : pool) {
      if (axes.size() == 3) break;
      if (std::none_of(axes.begin(), axes.end(),
                       [&](const Op& a) { return conflicts(a.feature, op.feature); })) {
        axes.push_back(op);
      }
    }
    if (axes.size() < 3) break;
    AnswerSet out;
    bool ok = true;
    for (int m = 0; m < kChoices && ok; ++m) {
      PanelSpec p = item.correct;
      for (int axis = 0; axis < 3 && ok; ++axis) {
        if ((m >> axis) & 1) ok = apply(p, axes[static_cast<std::size_t>(axis)], ctx.config);
      }
      if (ok && m > 0) ok = ctx.acceptable(p, out.choices);
      out.choices.push_back(std::move(p));
    }
    if (ok) return out;
  }
  throw InfeasibleError("impartial: no three independent attribute modifications");
}

AnswerSet gen_fair_tree(const ItemSpec& item, const Catalog& cat, std::uint64_t seed) {
  const Context ctx = make_context(item, cat);
  Rng rng(seed);
  return grow(ctx, rng, [](int size) {
    std::vector<int> v(static_cast<std::size_t>(size));
    std::iota(v.begin(), v.end(), 0);
    return v;
  }, "fair-tree");
}

AnswerSet gen_sandia(const ItemSpec& item, const Catalog& cat, char letter, std::uint64_t seed) {
  const Context ctx = make_context(item, cat);
  Rng rng(seed);
  AnswerSet out;
  out.choices.push_back(item.correct);
  auto fill = [&](auto&& candidate, const char* name) {
    for (int tries = 0; tries < kTries * 4 && out.choices.size() < kChoices; ++tries) {
      std::optional<PanelSpec> p = candidate();
      if (p && ctx.acceptable(*p, out.choices)) out.choices.push_back(std::move(*p));
    }
    if (out.choices.size() < kChoices) {
      throw InfeasibleError(std::string("sandia-") + name + ": recipe infeasible");
    }
  };
  auto random_edit = [&](const PanelSpec& from) -> std::optional<PanelSpec> {
    const auto ops = edit_ops(from, cat, ctx.config);
    if (ops.empty()) return std::nullopt;
    PanelSpec p = from;
    if (!apply(p, rng.pick(ops), ctx.config)) return std::nullopt;
    return p;
  };

  switch (letter) {
    case 'a': {
      std::vector<PanelSpec> pool;
      for (const auto& p : item.context) {
        if (ctx.acceptable(p, pool)) pool.push_back(p);
      }
      if (pool.size() < kChoices - 1) throw InfeasibleError("sandia-a: too few distinct entries");
      rng.shuffle(pool);
      out.choices.insert(out.choices.end(), pool.begin(), pool.begin() + (kChoices - 1));
      return out;
    }
    case 'b':
      fill([&] { return random_edit(rng.pick(item.context)); }, "b");
      return out;
    case 'c':
      fill([&] { return random_edit(item.correct); }, "c");
      return out;
    case 'd':
      return grow(ctx, rng, [](int size) {
        if (size == 1) return std::vector<int>{0};
        std::vector<int> v(static_cast<std::size_t>(size - 1));
        std::iota(v.begin(), v.end(), 1);
        return v;
      }, "sandia-d");
    case 'e': {
      // Values each (component, attribute) shows somewhere in the matrix.
      std::map<std::pair<int, int>, std::vector<Value>> seen;
      for (const auto& p : item.context) {
        for (const auto& e : p.entities) {
          for (int a = 0; a < kEntityAttributeCount; ++a) {
            auto& v = seen[{e.component, a}];
            const Value x = e.attrs[static_cast<std::size_t>(a)];
            if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
          }
        }
      }
      for (auto& [k, v] : seen) std::sort(v.begin(), v.end());
      fill([&]() -> std::optional<PanelSpec> {
        PanelSpec p = rng.pick(item.context);
        for (auto& e : p.entities) {
          const auto& comp = ctx.config.components[static_cast<std::size_t>(e.component)];
          for (int a = 0; a < kEntityAttributeCount; ++a) {
            if (!editable(static_cast<AttributeId>(a), comp, cat)) continue;
            e.attrs[static_cast<std::size_t>(a)] = rng.pick(seen[{e.component, a}]);
          }
        }
        p.canonicalize();
        if (contains(item.context, p)) return std::nullopt;
        return p;
      }, "e");
      return out;
    }
    case 'f': {
      std::array<std::set<Value>, kEntityAttributeCount> seen;
      for (const auto& p : item.context) {
        for (const auto& e : p.entities) {
          for (int a = 0; a < kEntityAttributeCount; ++a) {
            seen[static_cast<std::size_t>(a)].insert(e.attrs[static_cast<std::size_t>(a)]);
          }
        }
      }
      // (entity index, attribute, novel value) edits of the correct answer.
      std::vector<std::tuple<std::size_t, int, Value>> novel;
      for (std::size_t i = 0; i < item.correct.entities.size(); ++i) {
        const auto& e = item.correct.entities[i];
        const auto& comp = ctx.config.components[static_cast<std::size_t>(e.component)];
        for (int a = 0; a < kEntityAttributeCount; ++a) {
          const auto attr = static_cast<AttributeId>(a);
          if (!editable(attr, comp, cat)) continue;
          for (Value v : cat.domain(attr, comp.name).values) {
            if (seen[static_cast<std::size_t>(a)].count(v) == 0) novel.emplace_back(i, a, v);
          }
        }
      }
      if (novel.empty()) throw InfeasibleError("sandia-f: novel features exhausted");
      fill([&]() -> std::optional<PanelSpec> {
        PanelSpec p = item.correct;
        const auto [i, a, v] = rng.pick(novel);
        p.entities[i].attrs[static_cast<std::size_t>(a)] = v;
        p.canonicalize();
        return p;
      }, "f");
      return out;
    }
    default:
      throw Error(std::string("unknown Sandia strategy letter '") + letter + "'");
  }
}

AnswerSet gen_imak(const ItemSpec& item, const Catalog& cat, std::uint64_t seed) {
  const Context ctx = make_context(item, cat);
  Rng rng(seed);
  const int n = static_cast<int>(item.rules.size());
  if (n < 1 || n > 4) throw InfeasibleError("imak: needs 1 to 4 rules");

  std::vector<Feature> axes;
  for (const auto& r : item.rules) {
    if (r.attribute == AttributeId::number) throw InfeasibleError("imak: number has no option axis");
    axes.push_back(Feature{r.component == kAllComponents ? 0 : r.component, r.attribute});
  }
  if (n == 1) {
    // One extra attribute doubles the four rule-attribute values.
    std::vector<Feature> extra;
    for (std::size_t ci = 0; ci < ctx.config.components.size(); ++ci) {
      const auto& comp = ctx.config.components[ci];
      const Feature pos{static_cast<int>(ci), AttributeId::position};
      if (comp.slots.size() >= 2 && item.correct.count(pos.component) == 1 && pos != axes[0]) {
        extra.push_back(pos);
      }
      for (int a = 0; a < kEntityAttributeCount; ++a) {
        const Feature f{static_cast<int>(ci), static_cast<AttributeId>(a)};
        if (f != axes[0] && editable(f.attribute, comp, cat) && item.correct.count(f.component) > 0) {
          extra.push_back(f);
        }
      }
    }
    if (extra.empty()) throw InfeasibleError("imak: no attribute to pair with the rule");
    axes.push_back(rng.pick(extra));
  }

  const std::vector<int> widths = n == 1   ? std::vector<int>{4, 2}
                                  : n == 2 ? std::vector<int>{3, 3}
                                           : std::vector<int>(static_cast<std::size_t>(n), 2);
  std::vector<std::vector<Value>> levels;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Value current = read_feature(item.correct, axes[i]);
    std::vector<Value> others;
    for (Value v : feature_values(axes[i], cat, ctx.config)) {
      if (v != current) others.push_back(v);
    }
    const auto need = static_cast<std::size_t>(widths[i] - 1);
    if (others.size() < need) throw InfeasibleError("imak: attribute domain too small");
    rng.shuffle(others);
    others.resize(need);
    std::sort(others.begin(), others.end());
    others.insert(others.begin(), current);
    levels.push_back(std::move(others));
  }

  // Mixed-radix enumeration; combination 0 is the correct answer.
  int total = 1;
  for (int w : widths) total *= w;
  std::vector<int> combos(static_cast<std::size_t>(total - 1));
  std::iota(combos.begin(), combos.end(), 1);
  rng.shuffle(combos);
  combos.resize(kChoices - 1);
  std::sort(combos.begin(), combos.end());
  combos.insert(combos.begin(), 0);

  AnswerSet out;
  for (int code : combos) {
    PanelSpec p = item.correct;
    int rest = code;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const int w = widths[i];
      write_feature(p, axes[i], levels[i][static_cast<std::size_t>(rest % w)]);
      rest /= w;
    }
    if (code != 0 && !ctx.acceptable(p, out.choices)) {
      throw InfeasibleError("imak: a combination completes the item validly");
    }
    out.choices.push_back(std::move(p));
  }
  return out;
}

AnswerSet generate_answers(const ItemSpec& item, Strategy strategy, const Catalog& cat,
                           std::uint64_t seed) {
  switch (strategy) {
    case Strategy::star:
      return gen_star(item, cat, seed);
    case Strategy::impartial:
      return gen_impartial(item, cat, seed);
    case Strategy::fair_tree:
      return gen_fair_tree(item, cat, seed);
    case Strategy::sandia_a:
      return gen_sandia(item, cat, 'a', seed);
    case Strategy::sandia_b:
      return gen_sandia(item, cat, 'b', seed);
    case Strategy::sandia_c:
      return gen_sandia(item, cat, 'c', seed);
    case Strategy::sandia_d:
      return gen_sandia(item, cat, 'd', seed);
    case Strategy::sandia_e:
      return gen_sandia(item, cat, 'e', seed);
    case Strategy::sandia_f:
      return gen_sandia(item, cat, 'f', seed);
    case Strategy::imak:
      return gen_imak(item, cat, seed);
  }
  throw Error("unknown strategy");
}

void attach_answers(ItemSpec& item, Strategy strategy, const Catalog& cat, std::uint64_t seed) {
  AnswerSet set = generate_answers(item, strategy, cat, seed);
  if (set.choices.size() != kChoices) throw InfeasibleError("answer set is not of size 8");
  std::vector<int> order(kChoices);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "shuffle"));
  rng.shuffle(order);
  item.answers.clear();
  for (int k = 0; k < kChoices; ++k) {
    item.answers.push_back(set.choices[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]);
    if (order[static_cast<std::size_t>(k)] == 0) item.correct_index = k;
  }
  item.strategy = strategy;
}

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::star:
      return "star";
    case Topology::three_regular:
      return "3-regular";
    case Topology::tree:
      return "tree";
    case Topology::other:
      return "other";
  }
  return "other";
}

bool is_tree(int vertices, std::span<const std::pair<int, int>> edges) {
  if (static_cast<int>(edges.size()) != vertices - 1) return false;
  std::vector<int> parent(static_cast<std::size_t>(vertices));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  for (const auto& [a, b] : edges) {
    const int ra = find(a);
    const int rb = find(b);
    if (ra == rb) return false;
    parent[static_cast<std::size_t>(ra)] = rb;
  }
  return true;
}

AnswerGraph answer_graph(std::span<const PanelSpec> answers, const Configuration& config) {
  AnswerGraph g;
  const int n = static_cast<int>(answers.size());
  g.degree.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (panel_distance(answers[static_cast<std::size_t>(i)], answers[static_cast<std::size_t>(j)], config) == 1) {
        g.edges.emplace_back(i, j);
        ++g.degree[static_cast<std::size_t>(i)];
        ++g.degree[static_cast<std::size_t>(j)];
      }
    }
  }
  const auto hub = std::find(g.degree.begin(), g.degree.end(), n - 1);
  if (n > 1 && static_cast<int>(g.edges.size()) == n - 1 && hub != g.degree.end()) {
    g.topology = Topology::star;
    g.center = static_cast<int>(hub - g.degree.begin());
  } else if (n > 0 && std::all_of(g.degree.begin(), g.degree.end(), [](int d) { return d == 3; })) {
    g.topology = Topology::three_regular;
  } else if (is_tree(n, g.edges)) {
    g.topology = Topology::tree;
  }
  return g;
}

std::string_view to_string(Heuristic h) {
  return h == Heuristic::max_degree ? "max-degree" : "max-similarity";
}

Heuristic parse_heuristic(std::string_view name) {
  if (name == "max-degree") return Heuristic::max_degree;
  if (name == "max-similarity") return Heuristic::max_similarity;
  throw Error("unknown heuristic '" + std::string(name) + "'");
}

BlindChoice context_blind_solve(std::span<const PanelSpec> answers, Heuristic heuristic,
                                const Configuration& config) {
  const int n = static_cast<int>(answers.size());
  std::vector<int> score(static_cast<std::size_t>(n), 0);
  if (heuristic == Heuristic::max_degree) {
    score = answer_graph(answers, config).degree;
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) {
          score[static_cast<std::size_t>(i)] -= panel_distance(answers[static_cast<std::size_t>(i)], answers[static_cast<std::size_t>(j)], config);
        }
      }
    }
  }
  BlindChoice choice;
  const int best = *std::max_element(score.begin(), score.end());
  for (int i = 0; i < n; ++i) {
    if (score[static_cast<std::size_t>(i)] == best) choice.tied.push_back(i);
  }
  choice.index = choice.tied.front();
  return choice;
}

double blind_credit(const ItemSpec& item, Heuristic heuristic) {
  const auto& config = catalog(item.profile).configuration(item.configuration);
  const auto choice = context_blind_solve(item.answers, heuristic, config);
  const bool hit = std::find(choice.tied.begin(), choice.tied.end(), item.correct_index) !=
                   choice.tied.end();
  return hit ? 1.0 / static_cast<double>(choice.tied.size()) : 0.0;
}

AuditReport context_blind_audit(std::span<const ItemSpec> items, Heuristic heuristic) {
  if (items.empty()) throw Error("context-blind audit of an empty dataset");
  AuditReport report;
  double total = 0;
  for (const auto& item : items) {
    const auto& config = catalog(item.profile).configuration(item.configuration);
    const auto choice = context_blind_solve(item.answers, heuristic, config);
    const bool hit = std::find(choice.tied.begin(), choice.tied.end(), item.correct_index) !=
                     choice.tied.end();
    const double credit = hit ? 1.0 / static_cast<double>(choice.tied.size()) : 0.0;
    const auto topology = answer_graph(item.answers, config).topology;
    total += credit;
    if (choice.tied.size() > 1) ++report.ties;
    ++report.topology_counts[topology];
    report.topology_accuracy[topology] += credit;
  }
  for (auto& [t, acc] : report.topology_accuracy) {
    acc /= static_cast<double>(report.topology_counts[t]);
  }
  report.items = items.size();
  report.accuracy = total / static_cast<double>(items.size());
  return report;
}

}  // namespace fapforge
