// Copyright (c) 2026 The Prosodia Authors
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

#ifndef PROSODIA_TOOLS_CLI_H_
#define PROSODIA_TOOLS_CLI_H_

#include <iosfwd>

namespace prosodia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one `prosodia <subcommand> ...` invocation. Returns 0 on success, 1 on
// usage errors (unknown flag or subcommand, missing argument), 2 when the
// command itself fails.
int Dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace prosodia::cli

#endif  // PROSODIA_TOOLS_CLI_H_
