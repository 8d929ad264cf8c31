#include <iostream>

#include "sizzle/cli.hpp"

int main(int argc, char** argv)
{
    return sizzle::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
