#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "fingermi/runtime.hpp"

int main(int argc, char** argv) {
  fingermi::tune_allocator();
  doctest::Context context(argc, argv);
  return context.run();
}
