#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"
#include "tagdir/bif.hpp"
#include "tagdir/data.hpp"

using namespace tagdir;
using namespace testing_support;

namespace {

const char* const all_ids[] = {"cancer", "earthquake", "survey", "asia", "lucas", "child",
                               "alarm", "insurance", "hailfinder", "hepar2", "win95pts"};

BifNetwork load(const std::string& id) { return read_bif(data_path("networks/" + id + ".bif")); }

const char* const chain_bif = R"(network chain { }
variable A { type discrete [ 2 ] { a0, a1 }; }
variable B { type discrete [ 3 ] { b0, b1, b2 }; }
probability ( A ) { table 0.3, 0.7; }
probability ( B | A ) {
  (a0) 0.1, 0.2, 0.7;
  (a1) 1.0, 0.0, 0.0;
}
)";

}  // namespace

TEST(ParseBif, MinimalTable) {
  BifNetwork n = parse_bif("network x { }\nvariable A { type discrete [ 2 ] { yes, no }; }\n"
                           "probability ( A ) { table 0.4, 0.6; }\n");
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n.variables[0].states, (std::vector<std::string>{"yes", "no"}));
  EXPECT_NEAR(n.cpts[0][0] + n.cpts[0][1], 1.0, 1e-12);
}

TEST(ParseBif, RowFormWithParents) {
  BifNetwork n = parse_bif(chain_bif);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n.parents[1], (std::vector<VarId>{0}));
  EXPECT_DOUBLE_EQ(n.cpts[1][2], 0.7);
  EXPECT_DOUBLE_EQ(n.cpts[1][3], 1.0);
}

TEST(ParseBif, CommentsAndPropertiesTolerated) {
  BifNetwork n = parse_bif("// header\nnetwork x { property author = me; }\n/* block\ncomment */\n"
                           "variable A { type discrete [ 2 ] { t, f }; property pos = 1; }\n"
                           "probability ( A ) { table 0.5, 0.5; }\n");
  EXPECT_EQ(n.size(), 1u);
}

TEST(ParseBif, DefaultRow) {
  BifNetwork n = parse_bif(R"(network x { }
variable A { type discrete [ 2 ] { a0, a1 }; }
variable B { type discrete [ 2 ] { b0, b1 }; }
probability ( A ) { table 0.5, 0.5; }
probability ( B | A ) { (a1) 0.9, 0.1; default 0.2, 0.8; }
)");
  EXPECT_DOUBLE_EQ(n.cpts[1][0], 0.2);
  EXPECT_DOUBLE_EQ(n.cpts[1][2], 0.9);
}

TEST(ParseBif, RowNotSummingToOne) {
  EXPECT_THROW(parse_bif("network x { }\nvariable A { type discrete [ 2 ] { t, f }; }\n"
                         "probability ( A ) { table 0.5, 0.6; }\n"),
               ValidationError);
}

TEST(ParseBif, UndeclaredVariable) {
  EXPECT_THROW(parse_bif("network x { }\nvariable A { type discrete [ 2 ] { t, f }; }\n"
                         "probability ( A | Z ) { (t) 0.5, 0.5; (f) 0.5, 0.5; }\n"),
               ValidationError);
}

TEST(ParseBif, CyclicParents) {
  EXPECT_THROW(parse_bif(R"(network x { }
variable A { type discrete [ 2 ] { t, f }; }
variable B { type discrete [ 2 ] { t, f }; }
probability ( A | B ) { (t) 0.5, 0.5; (f) 0.5, 0.5; }
probability ( B | A ) { (t) 0.5, 0.5; (f) 0.5, 0.5; }
)"),
               ValidationError);
}

TEST(ParseBif, MissingConfiguration) {
  EXPECT_THROW(parse_bif(R"(network x { }
variable A { type discrete [ 2 ] { t, f }; }
variable B { type discrete [ 2 ] { t, f }; }
probability ( A ) { table 0.5, 0.5; }
probability ( B | A ) { (t) 0.5, 0.5; }
)"),
               ValidationError);
}

TEST(ParseBif, SyntaxErrorReportsLine) {
  try {
    parse_bif("network x { }\nvariable A { type discrete [ 2 ] { t, f } }\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseBif, ArcCountsOfBundledNetworks) {
  EXPECT_EQ(dag_of(load("asia")).num_arcs(), 8u);
  EXPECT_EQ(dag_of(load("asia")).size(), 8u);
  EXPECT_EQ(dag_of(load("alarm")).num_arcs(), 46u);
  EXPECT_EQ(dag_of(load("insurance")).num_arcs(), 52u);
  EXPECT_EQ(dag_of(load("child")).num_arcs(), 25u);
  EXPECT_EQ(dag_of(load("lucas")).num_arcs(), 12u);
}

TEST(ParseBif, RenderRoundTripOnAllNetworks) {
  for (const char* id : all_ids) {
    BifNetwork n = load(id);
    EXPECT_EQ(parse_bif(render_bif(n)), n) << id;
    EXPECT_TRUE(acyclic_ref(dag_of(n))) << id;
  }
}

TEST(DagOf, Chain) {
  Dag d = dag_of(parse_bif(chain_bif));
  EXPECT_TRUE(d.has_arc(0, 1));
  EXPECT_EQ(d.num_arcs(), 1u);
}

TEST(DagOf, CancerHasColliderWithTwoChildren) {
  Dag d = dag_of(load("cancer"));
  EXPECT_EQ(d.num_arcs(), 4u);
  VarId c = *d.find("Cancer");
  EXPECT_EQ(d.parents(c).size(), 2u);
  EXPECT_EQ(d.children(c).size(), 2u);
}

TEST(DagOf, NoParentsNoEdges) {
  BifNetwork n = parse_bif("network x { }\nvariable A { type discrete [ 2 ] { t, f }; }\n"
                           "variable B { type discrete [ 2 ] { t, f }; }\n"
                           "probability ( A ) { table 0.5, 0.5; }\nprobability ( B ) { table 0.1, 0.9; }\n");
  EXPECT_EQ(dag_of(n).num_adjacencies(), 0u);
}

TEST(ForwardSample, DeterministicCptGivesConstantColumn) {
  BifNetwork n = parse_bif("network x { }\nvariable A { type discrete [ 3 ] { a, b, c }; }\n"
                           "probability ( A ) { table 0, 1, 0; }\n");
  DataTable t = forward_sample(n, 500, 3);
  for (StateCode c : t.columns[0]) EXPECT_EQ(c, 1);
}

TEST(ForwardSample, ImpossibleStatesNeverDrawn) {
  DataTable t = forward_sample(parse_bif(chain_bif), 5000, 8);
  for (std::size_t r = 0; r < t.num_rows(); ++r)
    if (t.columns[0][r] == 1) EXPECT_EQ(t.columns[1][r], 0);
}

TEST(ForwardSample, SameSeedSameTable) {
  BifNetwork n = load("alarm");
  EXPECT_EQ(to_csv(forward_sample(n, 1000, 42)), to_csv(forward_sample(n, 1000, 42)));
  EXPECT_NE(to_csv(forward_sample(n, 1000, 42)), to_csv(forward_sample(n, 1000, 43)));
}

TEST(ForwardSample, BernoulliFrequency) {
  BifNetwork n = parse_bif("network x { }\nvariable A { type discrete [ 2 ] { t, f }; }\n"
                           "probability ( A ) { table 0.3, 0.7; }\n");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DataTable t = forward_sample(n, 10000, seed);
    double f = 0;
    for (StateCode c : t.columns[0]) f += c == 0;
    f /= 10000;
    EXPECT_NEAR(f, 0.3, 3 * std::sqrt(0.3 * 0.7 / 10000)) << seed;
  }
}

TEST(ForwardSample, ConditionalsFitOnAsia) {
  BifNetwork n = load("asia");
  GofSummary g = sampling_gof(n, forward_sample(n, 10000, 0), 200, 0.001);
  EXPECT_GT(g.tests, 10u);
  EXPECT_EQ(g.rejections, 0u);
}

TEST(ForwardSample, GoodnessOfFitDetectsWrongCpt) {
  BifNetwork n = load("asia");
  DataTable t = forward_sample(n, 10000, 0);
  BifNetwork skewed = n;
  VarId smoke = *n.find("smoke");
  skewed.cpts[smoke] = {0.45, 0.55};
  EXPECT_GT(sampling_gof(skewed, t, 200, 0.001).rejections, 0u);
}

TEST(DataCsv, RoundTrip) {
  DataTable t = forward_sample(load("survey"), 300, 1);
  DataTable back = parse_csv(to_csv(t), t.names, t.cardinality);
  EXPECT_EQ(back, t);
}

TEST(DataCsv, FileRoundTrip) {
  DataTable t = forward_sample(load("cancer"), 50, 2);
  auto path = (std::filesystem::temp_directory_path() / "tagdir_roundtrip.csv").string();
  write_csv(path, t);
  EXPECT_EQ(read_csv(path, t.names, t.cardinality), t);
  std::filesystem::remove(path);
}

TEST(DataCsv, HeaderMismatch) {
  DataTable t = forward_sample(load("cancer"), 5, 2);
  auto names = t.names;
  std::swap(names[0], names[1]);
  EXPECT_THROW(parse_csv(to_csv(t), names), SchemaMismatch);
}

TEST(DataCsv, EmptyTableIsHeaderOnly) {
  DataTable t = forward_sample(load("asia"), 0, 0);
  EXPECT_EQ(to_csv(t), "asia,tub,smoke,lung,bronc,either,xray,dysp\n");
  EXPECT_EQ(parse_csv(to_csv(t), t.names, t.cardinality), t);
}

TEST(DataCsv, MissingFileIsIoError) { EXPECT_THROW(read_csv("/nonexistent/dir/x.csv"), IoError); }
