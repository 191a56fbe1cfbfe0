#pragma once

#include "ctgi/error.hpp"

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

namespace testutil {

/// Fresh directory removed on scope exit.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("ctgi_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace testutil

/// Asserts that `stmt` throws ctgi::Error with the given code.
#define EXPECT_ERRC(stmt, errc)                                                                                       \
    do {                                                                                                              \
        try {                                                                                                         \
            stmt;                                                                                                     \
            ADD_FAILURE() << "expected " << ctgi::errc_name(errc) << ", nothing thrown";                              \
        } catch (const ctgi::Error& e_) {                                                                             \
            EXPECT_EQ(e_.code(), errc) << e_.what();                                                                  \
        }                                                                                                             \
    } while (0)
