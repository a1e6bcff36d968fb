#include <vector>

#include "llad/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return llad::cli_run(args);
}
