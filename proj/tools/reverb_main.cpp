#include "reverb/cli.hpp"

int main(int argc, char** argv) {
    return reverb::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
