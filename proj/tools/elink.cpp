#include <iostream>
#include <string>
#include <vector>

#include "elink/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return elink::cli::dispatch(std::move(args), std::cout, std::cerr);
}
