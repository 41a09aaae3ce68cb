#include <string>
#include <vector>

#include "clap/cli.hpp"

int main(int argc, char** argv) {
  return clap::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
