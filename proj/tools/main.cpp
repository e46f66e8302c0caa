#include <iostream>
#include <string>
#include <vector>

#include "netabc/cli.hpp"

int main(int argc, char** argv) {
  return netabc::cli::run_command(std::vector<std::string>(argv, argv + argc), std::cout,
                                  std::cerr);
}
