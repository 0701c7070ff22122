// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Command-line driver: loads a protocol file, runs the size-growing
// verification loop, and writes certificates and machine-readable results.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symquant {

// Runs the driver on `args` (options and the spec path, without the program
// name) and returns the process exit code: 0 safe, 1 violated, 2 usage or
// configuration error, 3 resources exhausted or solver failure. Progress and
// the verdict go to `out`, diagnostics to `err`.
int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err);

}  // namespace symquant
