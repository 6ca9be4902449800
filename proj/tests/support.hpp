#pragma once

#include <gtest/gtest.h>

#include "corrlab/error.hpp"

#define EXPECT_ERROR_KIND(stmt, expected_kind)                                        \
  do {                                                                               \
    try {                                                                            \
      stmt;                                                                          \
      ADD_FAILURE() << "expected corrlab::Error from " #stmt;                        \
    } catch (const corrlab::Error& e_) {                                             \
      EXPECT_EQ(e_.kind(), expected_kind) << e_.what();                              \
    }                                                                                \
  } while (0)
