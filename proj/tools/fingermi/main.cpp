#include <iostream>

#include "fingermi/cli.hpp"
#include "fingermi/runtime.hpp"

int main(int argc, char** argv) {
  fingermi::tune_allocator();
  return fingermi::cli::run(argc, argv, std::cout, std::cerr);
}
