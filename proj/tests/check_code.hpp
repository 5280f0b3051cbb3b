#pragma once

#include "vfdt_rf/error.hpp"

// Asserts that `expr` throws vfdt_rf::Error carrying `expected`.
#define CHECK_ERROR_CODE(expr, expected)                                  \
    do {                                                                  \
        bool thrown_ = false;                                             \
        try {                                                             \
            (void)(expr);                                                 \
        } catch (const vfdt_rf::Error& e_) {                              \
            thrown_ = true;                                               \
            CHECK_MESSAGE(e_.code() == (expected), e_.what());            \
        }                                                                 \
        CHECK_MESSAGE(thrown_, "expected " #expected " from " #expr);     \
    } while (false)
