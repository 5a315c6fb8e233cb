#pragma once

#include "mpdarcy/error.hpp"

#include <doctest.h>

#include <random>

namespace testing {

template <class F>
mpdarcy::ErrorCode error_code_of(F&& f)
{
    try {
        f();
    } catch (const mpdarcy::Error& e) {
        return e.code();
    }
    FAIL("expected an mpdarcy::Error");
    return mpdarcy::ErrorCode::io;
}

template <class F>
std::string error_message_of(F&& f)
{
    try {
        f();
    } catch (const mpdarcy::Error& e) {
        return e.what();
    }
    FAIL("expected an mpdarcy::Error");
    return {};
}

}  // namespace testing

#define CHECK_ERROR(expr, code) CHECK(testing::error_code_of([&] { (void)(expr); }) == mpdarcy::ErrorCode::code)
