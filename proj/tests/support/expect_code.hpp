#pragma once

#include <gtest/gtest.h>

#include "ctbench/error.hpp"

#define EXPECT_CODE(stmt, expected)                           \
    do {                                                      \
        try {                                                 \
            stmt;                                             \
            ADD_FAILURE() << "expected " << ctbench::to_string(expected); \
        } catch (const ctbench::Error& e) {                   \
            EXPECT_EQ(e.code(), expected) << e.what();        \
        }                                                     \
    } while (false)
