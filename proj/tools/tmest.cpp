#include <iostream>

#include "tmest/cli.hpp"

int main(int argc, char** argv) {
  return tmest::cli_main(argc, argv, std::cout, std::cerr);
}
