// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return wst::cli::run(argc, argv, std::cout, std::cerr); }
