#include <iostream>
#include <string>
#include <vector>

#include "maelstrom/cli.hpp"

int main(int argc, char** argv) {
    return maelstrom::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
