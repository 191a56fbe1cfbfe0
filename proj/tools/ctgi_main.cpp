#include "ctgi/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ctgi::cli::dispatch(argc, argv, std::cout, std::cerr);
}
