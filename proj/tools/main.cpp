#include <string>
#include <vector>

#include "parocs/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return parocs::run_cli(args);
}
