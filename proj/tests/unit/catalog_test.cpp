#include <cstdlib>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "fapforge/catalog.hpp"

using namespace fapforge;

namespace {

RuleSpec rule(RelationKind kind, AttributeId a, int parameter = 0) {
  RuleSpec r;
  r.relation = Relation{kind, parameter, false};
  r.attribute = a;
  r.target = natural_target(a);
  return r;
}

const char* kTinyCatalog = R"({
  "schema": "fapforge-catalog", "version": 1, "profile": "pgm-shape",
  "format": {"rows": 3, "cols": 3}, "directions": ["row"],
  "rule_count": {"min": 1, "max": 1},
  "attributes": [{"name": "size", "target": "entity", "labels": ["a", "b", "c"]}],
  "configurations": [{"id": "center", "components": [{"name": "main", "slots": [[0, 0, 1, 1]]}]}],
  "paths": [{"relation": "progression", "target": "entity", "attribute": "size"}]
})";

}  // namespace

TEST_CASE("triplet counts") {
  CHECK(enumerate_triplets(ProfileId::pgm).size() == 29);
  CHECK(enumerate_triplets(ProfileId::raven).size() == 14);
  CHECK(parse_catalog(kTinyCatalog).triplets().size() == 1);
}

TEST_CASE("triplets are distinct and legal") {
  for (auto p : {ProfileId::pgm, ProfileId::pgm_shape, ProfileId::pgm_line, ProfileId::raven,
                 ProfileId::sandia, ProfileId::hornke, ProfileId::imak_lite}) {
    const auto ts = enumerate_triplets(p);
    CHECK(std::set<Triplet>(ts.begin(), ts.end()).size() == ts.size());
    for (const auto& t : ts) CHECK(catalog(p).legal(t));
  }
}

TEST_CASE("attribute domain cardinalities") {
  CHECK(attribute_domain(ProfileId::raven, AttributeId::size).size() == 6);
  CHECK(attribute_domain(ProfileId::raven, AttributeId::color).size() == 10);
  CHECK(attribute_domain(ProfileId::raven, AttributeId::angle).size() == 8);
  CHECK(attribute_domain(ProfileId::sandia, AttributeId::size).size() == 5);
  CHECK(attribute_domain(ProfileId::sandia, AttributeId::color).size() == 5);
  CHECK(attribute_domain(ProfileId::sandia, AttributeId::angle).size() == 5);
  CHECK(attribute_domain(ProfileId::pgm_shape, AttributeId::size).size() == 10);
  CHECK(attribute_domain(ProfileId::pgm_shape, AttributeId::color).size() == 10);
  CHECK_THROWS_AS(attribute_domain(ProfileId::hornke, AttributeId::angle), CatalogError);
}

TEST_CASE("rule compatibility") {
  const Catalog& pgm = catalog(ProfileId::pgm_shape);
  const std::vector<RuleSpec> conflict = {rule(RelationKind::progression, AttributeId::number, 1),
                                          rule(RelationKind::distribution_of_three, AttributeId::position)};
  const auto c = compatible(conflict, catalog(ProfileId::raven));
  CHECK_FALSE(c.ok);
  CHECK(c.reason == "number-position-conflict");

  const auto empty = compatible({}, pgm);
  CHECK_FALSE(empty.ok);
  CHECK(empty.reason == "rule-count");

  const std::vector<RuleSpec> single = {rule(RelationKind::progression, AttributeId::size, 1)};
  CHECK(compatible(single, pgm).ok);
}

TEST_CASE("malformed catalogs are rejected") {
  CHECK_THROWS_AS(parse_catalog("{"), CatalogError);
  CHECK_THROWS_AS(parse_catalog(R"({"schema": "other"})"), CatalogError);
  std::string bad = kTinyCatalog;
  bad.replace(bad.find("\"size\", \"target\": \"entity\", \"labels\""), 6, "\"color\"");
  CHECK_THROWS_AS(parse_catalog(bad), CatalogError);  // path names an absent attribute
}

TEST_CASE("catalog directory can be overridden by the environment") {
  const auto before = catalog_dir();
  ::setenv("FAPFORGE_CATALOG_DIR", "/tmp/elsewhere", 1);
  CHECK(catalog_dir() == std::filesystem::path("/tmp/elsewhere"));
  ::unsetenv("FAPFORGE_CATALOG_DIR");
  CHECK(catalog_dir() == before);
  CHECK(std::filesystem::exists(before / "raven.json"));
}
