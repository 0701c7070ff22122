// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include <fstream>
#include <iostream>

#include "symquant/sat/smtlite.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  symquant::smtlite::Session session(std::cout);
  if (argc > 1 && std::string(argv[1]) != "-in") {
    std::ifstream in(argv[1]);
    if (!in.good()) {
      std::cerr << "smtlite: cannot open " << argv[1] << "\n";
      return 1;
    }
    return session.run(in);
  }
  return session.run(std::cin);
}
