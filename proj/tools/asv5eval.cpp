#include <iostream>

#include "asv5/cli.hpp"

int main(int argc, char **argv) {
  return asv5::cli::Run(argc, argv, std::cout, std::cerr);
}
