// Copyright 2026 The pathlab Authors
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

#ifndef PATHLAB__CLI_HPP_
#define PATHLAB__CLI_HPP_

#include <iosfwd>

namespace pathlab
{

/**
 * @brief Command-line entry point.
 *
 * Subcommands: gen-track, tune-mpc, train, eval, sweep, compare. Global
 * flags: --config, --seed, --out. Returns 0 on success, 1 on a usage error
 * and 2 on a runtime fault.
 */
int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

}  // namespace pathlab

#endif  // PATHLAB__CLI_HPP_
