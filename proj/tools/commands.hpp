// tools/commands.hpp

// Copyright 2026  Vectorscope Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VECTORSCOPE_TOOLS_COMMANDS_HPP_
#define VECTORSCOPE_TOOLS_COMMANDS_HPP_

#include <string>
#include <vector>

namespace vectorscope {

// One CLI invocation; args[0] is the program name.  Returns the process
// exit status.  Errors go to stderr; nothing throws across this boundary.
int RunCommandLine(const std::vector<std::string>& args);

}  // namespace vectorscope

#endif  // VECTORSCOPE_TOOLS_COMMANDS_HPP_
