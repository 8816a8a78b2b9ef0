#include <iostream>
#include <string>
#include <vector>

#include "planrec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return planrec::run_cli(args, std::cout, std::cerr);
}
