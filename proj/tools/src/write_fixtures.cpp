// Regenerates the fixture corpus: boxcert-fixtures <dir>

#include "boxcert/cli.hpp"

#include <exception>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  const std::string arg = argc == 2 ? argv[1] : "";
  if (argc != 2 || arg.empty() || arg[0] == '-') {
    std::cerr << "usage: boxcert-fixtures <dir>\n";
    return arg == "-h" || arg == "--help" ? 0 : 3;
  }
  try {
    boxcert::cli::write_fixture_corpus(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "boxcert-fixtures: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
