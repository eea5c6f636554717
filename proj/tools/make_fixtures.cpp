#include <iostream>

#include "embedfit/error.hpp"
#include "embedfit/fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: embedfit-fixtures <output-dir>\n";
    return 2;
  }
  try {
    embedfit::fixtures::write_fixture_files(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
