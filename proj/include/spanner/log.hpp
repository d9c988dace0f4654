// Copyright 2026 The Spanner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPANNER_LOG_HPP_
#define SPANNER_LOG_HPP_

#include <functional>
#include <string_view>

namespace spanner {

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide warning sink and returns the previous one. The
// default writes "warning: ..." lines to stderr.
WarningHandler SetWarningHandler(WarningHandler handler);
void Warn(std::string_view message);

}  // namespace spanner

#endif  // SPANNER_LOG_HPP_
