#include <iostream>
#include <string>
#include <vector>

#include "wctsv/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wctsv::cli::run_cli(args, std::cout, std::cerr);
}
