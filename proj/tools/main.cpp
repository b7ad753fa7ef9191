#include <iostream>

#include "vibrokit/cli.hpp"

int main(int argc, char** argv) {
    return vibrokit::run_cli(argc, argv, std::cout, std::cerr);
}
