#include <iostream>

#include "lookahead/commands.hpp"

int main(int argc, char** argv) {
    return lookahead::cli::run_cli(argc, argv, std::cout, std::cerr);
}
