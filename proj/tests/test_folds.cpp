#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hct/dataio/dataset.hpp"
#include "hct/log.hpp"
#include "support/synthetic.hpp"

using namespace hct;

namespace {

std::vector<SubjectLabel> cohort(int pd, int control) {
  std::vector<SubjectLabel> out;
  for (int i = 0; i < pd; ++i) out.emplace_back("Pt" + std::to_string(i), DiagnosisLabel::parkinson(2.0));
  for (int i = 0; i < control; ++i) out.emplace_back("Co" + std::to_string(i), DiagnosisLabel::control());
  return out;
}

}  // namespace

TEST(Folds, TwentyPdTenControlGiveTwoPlusOnePerFold) {
  const auto subjects = cohort(20, 10);
  const FoldPlan plan = make_folds(subjects, 10, 7);
  for (Index f = 0; f < 10; ++f) {
    const auto members = plan.subjects_in(f);
    const auto pd = std::count_if(members.begin(), members.end(), [](const std::string& s) { return s[0] == 'P'; });
    EXPECT_EQ(pd, 2);
    EXPECT_EQ(static_cast<Index>(members.size()) - pd, 1);
  }
}

TEST(Folds, SameSeedSamePlanAndInputOrderIrrelevant) {
  auto subjects = cohort(23, 13);
  const FoldPlan a = make_folds(subjects, 5, 99);
  std::reverse(subjects.begin(), subjects.end());
  const FoldPlan b = make_folds(subjects, 5, 99);
  EXPECT_EQ(a.fold_of, b.fold_of);
  const FoldPlan c = make_folds(subjects, 5, 100);
  EXPECT_NE(a.fold_of, c.fold_of);
}

TEST(Folds, PartitionAndStratificationPropertyOverRandomCohorts) {
  Rng rng(11);
  std::uniform_int_distribution<int> size(0, 60);
  std::uniform_int_distribution<int> kdist(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const Index k = kdist(rng);
    int pd = size(rng);
    int control = size(rng);
    if (pd != 0 && pd < k) pd = static_cast<int>(k);
    if (control != 0 && control < k) control = static_cast<int>(k);
    if (pd + control == 0) pd = static_cast<int>(k);
    const auto subjects = cohort(pd, control);
    const FoldPlan plan = make_folds(subjects, k, static_cast<std::uint64_t>(trial));
    ASSERT_EQ(plan.fold_of.size(), subjects.size());
    std::set<std::string> seen;
    for (Index f = 0; f < k; ++f) {
      const auto members = plan.subjects_in(f);
      for (const auto& s : members) EXPECT_TRUE(seen.insert(s).second) << s << " in two folds";
      const double n_pd =
          static_cast<double>(std::count_if(members.begin(), members.end(), [](const std::string& s) { return s[0] == 'P'; }));
      const double n_co = static_cast<double>(members.size()) - n_pd;
      // Each stratum is dealt round-robin: fold sizes differ by at most one.
      EXPECT_LE(std::abs(n_pd - static_cast<double>(pd) / static_cast<double>(k)), 1.0);
      EXPECT_LE(std::abs(n_co - static_cast<double>(control) / static_cast<double>(k)), 1.0);
    }
    EXPECT_EQ(seen.size(), subjects.size());
  }
}

TEST(Folds, Errors) {
  const auto small = cohort(20, 4);
  try {
    make_folds(small, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  EXPECT_THROW(make_folds(cohort(10, 10), 1, 1), Error);
  EXPECT_THROW(make_folds(cohort(0, 0), 2, 1), Error);
  auto dup = cohort(4, 4);
  dup.push_back(dup.front());
  EXPECT_THROW(make_folds(dup, 2, 1), Error);
  const FoldPlan plan = make_folds(cohort(4, 4), 2, 1);
  EXPECT_THROW(plan.subjects_in(2), Error);
}

TEST(Folds, EmptyStratumAllowed) {
  const FoldPlan plan = make_folds(cohort(12, 0), 4, 3);
  for (Index f = 0; f < 4; ++f) EXPECT_EQ(plan.subjects_in(f).size(), 3u);
}

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    subjects = hct::testing::synthetic_subjects({4, 2, 2, 2});
    walks = hct::testing::synthetic_cohort(subjects, 2, 350, 5);
  }
  std::vector<hct::testing::SyntheticSubject> subjects;
  std::vector<PreparedWalk> walks;
};

TEST_F(DatasetTest, DetectionLabelsAndNoLeakage) {
  const auto labels = subject_labels(walks, DatasetTask::detection);
  ASSERT_EQ(labels.size(), 10u);
  const FoldPlan plan = make_folds(labels, 2, 4);
  for (Index f = 0; f < 2; ++f) {
    const DatasetSplit split = build_dataset(walks, plan, f, DatasetTask::detection);
    std::set<std::string> train_subjects;
    for (const auto& item : split.train) train_subjects.insert(item.subject_id);
    for (const auto& item : split.test) {
      EXPECT_EQ(train_subjects.count(item.subject_id), 0u) << item.subject_id;
      EXPECT_EQ(plan.fold_of.at(item.subject_id), f);
      EXPECT_EQ(item.label, walks[item.walk_index].is_pd ? 1 : 0);
    }
    EXPECT_EQ(split.train.size() + split.test.size(), 20u * 3u);
    EXPECT_EQ(split.train_walks.size() + split.test_walks.size(), 20u);
  }
}

TEST_F(DatasetTest, StagingKeepsPdWalksOnly) {
  const auto labels = subject_labels(walks, DatasetTask::staging);
  ASSERT_EQ(labels.size(), 6u);
  const FoldPlan plan = make_folds(labels, 2, 4);
  const DatasetSplit split = build_dataset(walks, plan, 0, DatasetTask::staging);
  for (const auto* side : {&split.train, &split.test}) {
    for (const auto& item : *side) {
      EXPECT_GE(item.label, 0);
      EXPECT_LE(item.label, 2);
      const PreparedWalk& w = walks[item.walk_index];
      EXPECT_TRUE(w.is_pd);
      EXPECT_EQ(item.label, DiagnosisLabel::parkinson(*w.hy_stage).staging_class());
    }
  }
  EXPECT_EQ(split.train.size() + split.test.size(), 12u * 3u);
}

TEST_F(DatasetTest, FoldOutOfRangeIsRangeError) {
  const FoldPlan plan = make_folds(subject_labels(walks, DatasetTask::detection), 2, 4);
  try {
    build_dataset(walks, plan, 2, DatasetTask::detection);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range);
  }
}

TEST(PrepareWalk, AttachesLabelsAndSkipsUnknownSubjects) {
  const LabelTable table = load_labels("ID\tGroup\tHoehnYahr\nGaPt01\tPD\t2.5\nGaPt02\tPD\t\n");
  const auto staged = prepare_walk(hct::testing::synthetic_walk("GaPt01", "01", 2, 230, 1), table, 100);
  ASSERT_TRUE(staged);
  EXPECT_TRUE(staged->stageable());
  EXPECT_EQ(staged->segments.size(), 2u);
  EXPECT_EQ(task_label(*staged, DatasetTask::staging), std::optional<int>(1));
  const auto unstaged = prepare_walk(hct::testing::synthetic_walk("GaPt02", "01", 2, 230, 1), table, 100);
  ASSERT_TRUE(unstaged);
  EXPECT_FALSE(unstaged->stageable());
  EXPECT_EQ(task_label(*unstaged, DatasetTask::detection), std::optional<int>(1));
  EXPECT_EQ(task_label(*unstaged, DatasetTask::staging), std::nullopt);
  ScopedWarningCapture capture;
  EXPECT_FALSE(prepare_walk(hct::testing::synthetic_walk("GaCo09", "01", 0, 230, 1), table, 100));
  EXPECT_TRUE(capture.contains("GaCo09"));
}
