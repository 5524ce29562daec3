#include <string>
#include <vector>

#include "radauhp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return radauhp::cli_run(std::move(args));
}
