/* Copyright 2026 The densefocus Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DENSEFOCUS_CLI_H_
#define DENSEFOCUS_CLI_H_

#include <ostream>

namespace densefocus {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitFormat = 3,
  kExitNumeric = 4,
};

// Entry point of the `densefocus` tool. Diagnostics go to `err` as a single
// line; command results (eval reports, gradcheck summaries, loss traces
// without --out) go to `out`.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace densefocus

#endif  // DENSEFOCUS_CLI_H_
