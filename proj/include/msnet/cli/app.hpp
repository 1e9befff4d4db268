// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace msnet::cli {

// Runs one `msnet` invocation; args exclude the program name. Returns the
// process exit status. Failures print exactly one line to err:
//   error: <CODE>: <message>
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msnet::cli
