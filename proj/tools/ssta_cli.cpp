#include <string>
#include <vector>

#include "ssta/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ssta::cli::run(args);
}
