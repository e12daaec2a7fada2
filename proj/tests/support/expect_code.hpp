#pragma once

#include <gtest/gtest.h>

#include "sportsim/error.hpp"

// Expects `stmt` to throw sportsim::Error carrying `expected`.
#define EXPECT_CODE(stmt, expected)                                            \
  do {                                                                         \
    try {                                                                      \
      stmt;                                                                    \
      ADD_FAILURE() << #stmt " did not throw";                                 \
    } catch (const ::sportsim::Error& e_) {                                    \
      EXPECT_EQ(static_cast<int>(e_.code()), static_cast<int>(expected))       \
          << #stmt ": " << e_.what();                                          \
    }                                                                          \
  } while (0)
