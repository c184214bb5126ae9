// Copyright 2026 The HRT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HRT_FORMAT_HPP
#define HRT_FORMAT_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace hrt {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a whole string as a double; throws LoadError on trailing junk.
double parse_double(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace hrt

#endif  // HRT_FORMAT_HPP
