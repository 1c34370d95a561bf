#include <iostream>

#include "mgtd/pipeline.hpp"

int main(int argc, char** argv) { return mgtd::cli::run(argc, argv, std::cout, std::cerr); }
