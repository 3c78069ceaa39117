/*
 * Copyright 2026 The LCL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Internal helpers shared by the file readers and writers.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace lcl::detail {

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// RFC-4180 field split of one line (quoted fields, doubled quotes).
std::vector<std::string> split_csv(std::string_view line);
/// Quotes the field when it contains a comma, quote or newline.
std::string csv_field(std::string_view field);

/// Strict full-token parse; throws Parse naming `what` on failure.
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

/// Shortest decimal form that round-trips every finite double.
std::string format_double(double value);

}  // namespace lcl::detail
