// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "ctcf/cli.hpp"

int main(int argc, char** argv) { return ctcf::run_cli(argc, argv, std::cout, std::cerr); }
