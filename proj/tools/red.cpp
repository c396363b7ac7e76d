#include <string>
#include <vector>

#include "red/cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return red::cli::run_cli(args);
}
