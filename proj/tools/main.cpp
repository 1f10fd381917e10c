#include "evlf/cli.hpp"

int main(int argc, char** argv) {
    return evlf::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
