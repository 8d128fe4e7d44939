#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return pinembed::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
