// Copyright (c) 2026 The hybrid-asr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HASR_CLI_H_
#define HASR_CLI_H_

#include <iosfwd>

namespace hasr {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags or configuration
  kExitRuntime = 2,   // I/O, data or network failure
  kExitBelowTarget = 3,  // evaluate under --min-accuracy
};

// The `hasr` command line. JSON goes to `out`, prose to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hasr

#endif  // HASR_CLI_H_
