#include <gtest/gtest.h>

#include "qsynth/bounds.hpp"

using namespace qsynth;

TEST(Bounds, CircuitParams) {
  EXPECT_EQ(circuit_params(Task::state_prep, 4, 2, 6), 32);
  EXPECT_EQ(circuit_params(Task::unitary, 3, 2, 0), 9);
  EXPECT_EQ(circuit_params(Task::state_prep, 4, 4, 3), 32);
}

TEST(Bounds, TargetParams) {
  EXPECT_EQ(target_params(Task::state_prep, 4), 30);
  EXPECT_EQ(target_params(Task::unitary, 3), 63);
  EXPECT_EQ(target_params(Task::state_prep, 1), 2);
}

TEST(Bounds, LowerBoundTable) {
  EXPECT_EQ(lower_bound(Task::state_prep, 2, 2), 1);
  EXPECT_EQ(lower_bound(Task::state_prep, 3, 2), 2);
  EXPECT_EQ(lower_bound(Task::state_prep, 3, 3), 2);
  EXPECT_EQ(lower_bound(Task::state_prep, 4, 2), 6);
  EXPECT_EQ(lower_bound(Task::state_prep, 4, 3), 4);
  EXPECT_EQ(lower_bound(Task::state_prep, 4, 4), 3);
  EXPECT_EQ(lower_bound(Task::unitary, 3, 2), 14);
  EXPECT_EQ(lower_bound(Task::unitary, 3, 3), 9);
  EXPECT_EQ(lower_bound(Task::unitary, 4, 2), 61);
}

TEST(Bounds, LeastCrossingByScan) {
  for (auto task : {Task::state_prep, Task::unitary}) {
    for (int n = 1; n <= 4; ++n) {
      for (int m = 2; m <= n; ++m) {
        int N = 0;
        while (circuit_params(task, n, m, N) < target_params(task, n)) ++N;
        ASSERT_LE(N, 200);
        EXPECT_EQ(lower_bound(task, n, m), N) << to_string(task) << " n=" << n << " m=" << m;
      }
    }
  }
}

TEST(Bounds, Monotone) {
  for (auto task : {Task::state_prep, Task::unitary}) {
    for (int n = 3; n <= 5; ++n) {
      for (int m = 3; m <= n; ++m) EXPECT_LE(lower_bound(task, n, m), lower_bound(task, n, m - 1));
      for (int m = 2; m < n; ++m) EXPECT_GE(lower_bound(task, n, m), lower_bound(task, n - 1, m));
    }
  }
}

TEST(Bounds, ParseTask) {
  EXPECT_EQ(parse_task("state"), Task::state_prep);
  EXPECT_EQ(parse_task("unitary"), Task::unitary);
  EXPECT_THROW(parse_task("gate"), std::invalid_argument);
}
