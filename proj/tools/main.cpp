#include <vector>

#include "carmm/runner.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return carmm::cli::run(args);
}
