// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include <iostream>
#include <string>
#include <vector>

#include "symquant/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return symquant::run_cli(std::move(args), std::cout, std::cerr);
}
