#include <iostream>

#include "perspcrop/cli.hpp"

int main(int argc, char** argv) {
    return perspcrop::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
