#include <iostream>

#include "wgmgyro/cli.hpp"

int main(int argc, char** argv) {
    return wgmgyro::cli::run(argc, argv, std::cout, std::cerr);
}
