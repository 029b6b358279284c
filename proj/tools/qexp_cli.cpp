/**
 * @file qexp_cli.cpp
 * @brief Entry point of the qexp command-line tool.
 */
#include <iostream>
#include <string>
#include <vector>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return qexp::cli::run(args, std::cout, std::cerr);
}
