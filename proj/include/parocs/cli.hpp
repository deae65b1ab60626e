#pragma once

#include <string>
#include <vector>

namespace parocs {

/// Entry point behind the parocs binary; also callable from tests.
/// Exit codes: 0 ok, 1 config error, 2 solver failure, 3 fit failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace parocs
