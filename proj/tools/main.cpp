#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lehmann/log.hpp"

int main(int argc, char** argv) {
  lehmann::init_logging_from_env();
  const std::vector<std::string> args(argv, argv + argc);
  return lehmann::cli::run_cli(args, std::cout, std::cerr);
}
