#include <iostream>

#include "storyline/commands.hpp"

int main(int argc, char** argv) {
  return storyline::run_cli(argc, argv, std::cout, std::cerr);
}
