#include <iostream>

#include "psiest/cli/app.hpp"

int main(int argc, char** argv) {
  return psiest::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
