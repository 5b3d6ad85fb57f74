#include "mrrnn/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return mrrnn::cli::run(argc, argv, std::cout, std::cerr); }
