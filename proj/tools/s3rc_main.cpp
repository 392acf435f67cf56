#include <iostream>

#include "s3rc/cli_app.hpp"

int main(int argc, char** argv) {
  return s3rc::run_cli(argc, argv, std::cout, std::cerr);
}
