#include <sstream>

#include <gtest/gtest.h>

#include "gmatch/core.hpp"
#include "gmatch/matching.hpp"

using namespace gmatch;

namespace {

CsvTable read(const std::string& text, bool relabel = false) {
  std::istringstream in(text);
  return read_long_csv(in, "mem", relabel);
}

}  // namespace

TEST(TimeConfig, Bounds) {
  EXPECT_THROW(TimeConfig(1, 1), ValidationError);
  EXPECT_THROW(TimeConfig(5, 1), ValidationError);
  EXPECT_THROW(TimeConfig(5, 6), ValidationError);
  const TimeConfig t(10, 7);
  EXPECT_EQ(t.num_pre(), 6);
  EXPECT_EQ(t.num_post(), 4);
  EXPECT_FALSE(t.is_post(6));
  EXPECT_TRUE(t.is_post(7));
}

TEST(SimplexVector, ClampsTinyNegatives) {
  const SimplexVector w(Vector{{0.5, 0.5 + 1e-12, -1e-12}});
  EXPECT_EQ(w[2], 0.0);
  EXPECT_NEAR(w.values().sum(), 1.0, 1e-15);
  EXPECT_FALSE(w.interior());
}

TEST(SimplexVector, Rejects) {
  EXPECT_THROW(SimplexVector(Vector{{0.6, 0.6}}), ValidationError);
  EXPECT_THROW(SimplexVector(Vector{{1.1, -0.1}}), ValidationError);
  EXPECT_THROW(SimplexVector{Vector(0)}, ValidationError);
  EXPECT_THROW(SimplexVector(Vector{{std::nan(""), 1.0}}), ValidationError);
}

TEST(SimplexVector, VertexAndUniform) {
  const auto v = SimplexVector::vertex(4, 2);
  EXPECT_EQ(v[2], 1.0);
  EXPECT_EQ(v.values().sum(), 1.0);
  const auto u = SimplexVector::uniform(4);
  EXPECT_TRUE(u.interior());
  EXPECT_DOUBLE_EQ(u[0], 0.25);
}

TEST(Differencing, Kinds) {
  const TimeConfig t(6, 4);
  const auto did = make_differencing(DifferencingKind::did, t);
  EXPECT_EQ(did.lambda(), (Vector{{0.0, 0.0, 1.0}}));
  const auto uni = make_differencing(DifferencingKind::uniform, t);
  EXPECT_NEAR(uni.lambda().sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(uni.lambda()[0], 1.0 / 3.0);
  const auto none = make_differencing(DifferencingKind::none, t);
  EXPECT_EQ(none.lambda().sum(), 0.0);
  const auto custom = make_differencing(DifferencingKind::custom, t, Vector{{0.2, 0.3, 0.5}});
  EXPECT_DOUBLE_EQ(custom.lambda()[1], 0.3);
}

TEST(Differencing, CustomValidation) {
  const TimeConfig t(6, 4);
  EXPECT_THROW(make_differencing(DifferencingKind::custom, t), ValidationError);
  EXPECT_THROW(make_differencing(DifferencingKind::custom, t, Vector{{0.5, 0.5}}), ValidationError);
  EXPECT_THROW(make_differencing(DifferencingKind::custom, t, Vector{{0.5, 0.6, -0.1}}),
               ValidationError);
  EXPECT_THROW(make_differencing(DifferencingKind::did, t, Vector{{0.0, 0.0, 1.0}}),
               ValidationError);
}

TEST(Differencing, ParseNames) {
  EXPECT_EQ(parse_differencing_kind("uniform"), DifferencingKind::uniform);
  EXPECT_EQ(parse_differencing_kind("none"), DifferencingKind::none);
  EXPECT_THROW(parse_differencing_kind("weird"), ValidationError);
  EXPECT_EQ(parse_dataset_mode("rc"), DatasetMode::repeated_cross_sections);
  EXPECT_THROW(parse_dataset_mode("pooled"), ValidationError);
}

TEST(Dataset, PanelValidation) {
  const TimeConfig t(2, 2);
  std::vector<std::string> names{"a", "b"};
  EXPECT_THROW(Dataset::build(DatasetMode::panel, t, 1, {{0, 1, 0, 1.0}, {0, 2, 1, 1.0}}, names),
               ValidationError);
  EXPECT_THROW(Dataset::build(DatasetMode::panel, t, 1, {{0, 1, 0, 1.0}, {0, 1, 0, 2.0}}, names),
               ValidationError);
  EXPECT_THROW(Dataset::build(DatasetMode::panel, t, 1, {{0, 3, 0, 1.0}}, names), ValidationError);
  EXPECT_THROW(Dataset::build(DatasetMode::panel, t, 1, {{0, 1, 2, 1.0}}, names), ValidationError);
  EXPECT_THROW(Dataset::build(DatasetMode::panel, t, 1, {{0, 1, 0, INFINITY}}, names),
               ValidationError);
  EXPECT_THROW(Dataset::build(DatasetMode::panel, t, 0, {}, names), ValidationError);
}

TEST(Dataset, CountsAndSampleSize) {
  const TimeConfig t(2, 2);
  const auto d = Dataset::build(DatasetMode::panel, t, 1,
                                {{0, 1, 0, 1.0}, {0, 2, 0, 2.0}, {1, 1, 1, 3.0}, {2, 2, 1, 4.0}},
                                {"a", "b", "c"});
  EXPECT_EQ(d.sample_size(), 3u);
  EXPECT_EQ(d.count(1, 1), 1);
  EXPECT_EQ(d.count(1, 2), 1);
  EXPECT_EQ(d.period_size(2), 2);
  EXPECT_EQ(d.unit_groups(), (std::vector<int>{0, 1, 1}));
  const auto rc = Dataset::build(DatasetMode::repeated_cross_sections, t, 1,
                                 {{0, 1, 0, 1.0}, {0, 2, 0, 2.0}}, {"a"});
  EXPECT_EQ(rc.sample_size(), 2u);
}

TEST(Csv, ParsesWithBomCrlfAndWhitespace) {
  const auto table = read("\xEF\xBB\xBFunit,period,group,outcome\r\n a , 1 ,0, 1.5\r\n\r\nb,2,1,-2e-1\n");
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.unit_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(table.rows[1].period, 2);
  EXPECT_DOUBLE_EQ(table.rows[1].outcome, -0.2);
  EXPECT_EQ(table.max_group, 1);
  EXPECT_EQ(table.max_period, 2);
}

TEST(Csv, RejectsMalformed) {
  EXPECT_THROW(read(""), ValidationError);
  EXPECT_THROW(read("id,t,g,y\n"), ValidationError);
  EXPECT_THROW(read("unit,period,group,outcome\na,1,0\n"), ValidationError);
  EXPECT_THROW(read("unit,period,group,outcome\na,x,0,1\n"), ValidationError);
  EXPECT_THROW(read("unit,period,group,outcome\na,1,0,nan\n"), ValidationError);
  EXPECT_THROW(read("unit,period,group,outcome\na,1,-1,1\n"), ValidationError);
  EXPECT_THROW(read("unit,period,group,outcome\na,0,0,1\n"), ValidationError);
  EXPECT_THROW(read("unit,period,group,outcome\n,1,0,1\n"), ValidationError);
}

TEST(Csv, ErrorMentionsLine) {
  try {
    read("unit,period,group,outcome\na,1,0,1\nb,1,0,oops\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Csv, RelabelPeriods) {
  const auto table = read("unit,period,group,outcome\na,2001,0,1\na,2005,0,1\nb,2003,1,1\n", true);
  EXPECT_EQ(table.rows[0].period, 1);
  EXPECT_EQ(table.rows[1].period, 3);
  EXPECT_EQ(table.rows[2].period, 2);
  EXPECT_EQ(table.max_period, 3);
}

TEST(Csv, EmptyCellIsValidationError) {
  auto table = read("unit,period,group,outcome\na,1,0,1\na,2,0,1\nb,1,1,1\n");
  const auto d = dataset_from_table(std::move(table), DatasetMode::panel, TimeConfig(2, 2));
  EXPECT_THROW(compute_group_means(d), ValidationError);
}
