#include <iostream>

#include "qlearn/cli.hpp"

int main(int argc, char** argv) {
  return qlearn::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
