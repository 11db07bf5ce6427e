#include <iostream>

#include "pnsearch/cli_commands.hpp"

int main(int argc, char** argv) {
  return pnsearch::cli::run(argc, argv, {std::cout, std::cerr});
}
