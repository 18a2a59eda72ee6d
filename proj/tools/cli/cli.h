// Copyright 2026 The wmtrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef WMTRACE_TOOLS_CLI_CLI_H_
#define WMTRACE_TOOLS_CLI_CLI_H_

#include <atomic>
#include <string>
#include <vector>

namespace wmtrace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotWatermarked = 1;
inline constexpr int kExitError = 2;

// Set by the SIGINT handler; in-flight model requests observe it and fail
// with a cancelled error.
std::atomic<bool>& CancelFlag();

// Parses `args` (args[0] is the program name), runs the subcommand and
// returns the process exit code. Results go to the paths named by flags
// and to stdout; errors go to stderr as one JSON object per line.
int Run(const std::vector<std::string>& args);

}  // namespace wmtrace::cli

#endif  // WMTRACE_TOOLS_CLI_CLI_H_
