#include <string>
#include <vector>

#include "sighedge/cli/harness.hpp"

int main(int argc, char** argv) {
    return sighedge::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
