// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "msnet/cli/app.hpp"

int main(int argc, char** argv) {
  return msnet::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
