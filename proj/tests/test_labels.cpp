#include <gtest/gtest.h>

#include "hct/dataio/labels.hpp"
#include "hct/log.hpp"

using namespace hct;

TEST(Labels, ControlsGetStageZeroAndPdKeepsStage) {
  const LabelTable t = load_labels("ID\tGroup\tHoehnYahr\nGaCo01\tCO\t\nGaPt02\tPD\t2.5\nGaCo03\tCO\tNaN\n");
  ASSERT_EQ(t.labels.size(), 3u);
  EXPECT_EQ(t.labels.at("GaCo01"), DiagnosisLabel::control());
  EXPECT_EQ(t.labels.at("GaCo03"), DiagnosisLabel::control());
  EXPECT_EQ(t.labels.at("GaPt02"), (DiagnosisLabel{true, 2.5}));
  EXPECT_TRUE(t.unstaged_pd.empty());
}

TEST(Labels, OutOfRangePdStageIsExcludedWithWarning) {
  ScopedWarningCapture capture;
  const LabelTable t = load_labels("ID,Group,HoehnYahr\nGaPt01,PD,4\nGaPt02,PD,\nGaPt03,PD,3\n");
  EXPECT_EQ(t.labels.size(), 1u);
  EXPECT_EQ(t.unstaged_pd, (std::set<std::string>{"GaPt01", "GaPt02"}));
  EXPECT_EQ(t.warnings.size(), 2u);
  EXPECT_TRUE(capture.contains("GaPt01"));
  EXPECT_EQ(t.is_pd("GaPt01"), std::optional<bool>(true));
  EXPECT_EQ(t.is_pd("nobody"), std::nullopt);
}

TEST(Labels, DuplicateSubjectIsFormatError) {
  try {
    load_labels("ID Group HoehnYahr\nGaPt01 PD 2\nGaPt01 PD 2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
  }
}

TEST(Labels, MissingColumnAndUnknownGroup) {
  EXPECT_THROW(load_labels("ID\tGroup\nGaPt01\tPD\n"), Error);
  EXPECT_THROW(load_labels("ID\tGroup\tHoehnYahr\nGaPt01\tmaybe\t2\n"), Error);
  EXPECT_THROW(load_labels(""), Error);
}

TEST(Labels, ConfigurableColumnsAndGroupSpellings) {
  const LabelTable t = load_labels("subject;x\tdiag\tstage\nA\tParkinson\t2\nB\thealthy\t\n", {"subject;x", "diag", "stage"});
  EXPECT_TRUE(t.labels.at("A").is_pd);
  EXPECT_FALSE(t.labels.at("B").is_pd);
}

TEST(Labels, PublicCorpusHeaderLayout) {
  const std::string table =
      "ID\tStudy\tGroup\tSubjnum\tGender\tAge\tHeight\tWeight\tHoehnYahr\tUPDRS\n"
      "GaPt03\tGa\tPD\t3\t2\t82\t1.45\t50\t3\t20\n"
      "GaCo02\tGa\tCO\t2\t2\t62\t1.56\t62\t\t\n";
  const LabelTable t = load_labels(table);
  EXPECT_EQ(t.labels.at("GaPt03"), (DiagnosisLabel{true, 3.0}));
  EXPECT_EQ(t.labels.at("GaCo02"), DiagnosisLabel::control());
}
